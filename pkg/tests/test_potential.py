from fractions import Fraction

import numpy as np
import pytest

from rkcontract.errors import DomainError
from rkcontract.potential import (
    MollifiedPotential,
    build_counterexample_potential,
    build_pwl,
    calibrated_alpha,
    choose_kernel_width,
    effective_lipschitz,
    export_grid_csv,
    export_tessellation_csv,
    gradient_jump_constant,
    kernel_inclusions,
    kernel_width_bound,
    mollified_gradient,
    mollified_value,
    tessellate,
    tessellation_svg,
    witness_noncontractivity,
)


def plane_arrays(p):
    G = np.array([[float(v) for v in piece.G] for piece in p.shape])
    Z = np.array([[float(v) for v in piece.Z] for piece in p.shape])
    F = np.array([float(piece.F) for piece in p.shape])
    return G, Z, F


def monte_carlo_fractions(p, center, ell, n, rng):
    """Fraction of uniform samples of the square that fall in each region."""
    G, Z, F = plane_arrays(p)
    pts = np.asarray(center) + ell * (rng.random((n, 2)) - 0.5)
    vals = F[None, :] + np.sum(G[None, :, :] * (pts[:, None, :] - Z[None, :, :]), axis=-1)
    counts = np.bincount(np.argmax(vals, axis=1), minlength=len(F))
    return counts / n


@pytest.fixture(scope="module")
def unit_potential():
    """Smoothed potential with L'h = 1 and the default kernel width."""
    return MollifiedPotential(build_pwl(1.0, 1.0), choose_kernel_width())


def test_interpolation_data(unit_potential):
    p = unit_potential.base
    for i, piece in enumerate(p.pieces):
        assert p.value(piece.Z) == pytest.approx(piece.F, abs=1e-14)
    slacks = p.necessary_slacks()
    assert np.all(slacks[~np.eye(4, dtype=bool)] > 0)
    assert np.all(np.diag(slacks) == 0)


def test_build_rejects_large_product():
    with pytest.raises(DomainError):
        build_pwl(2.0, 1.0)


def test_anchor_regions_at_unit_product(unit_potential):
    tess = unit_potential.tessellation
    for i, piece in enumerate(unit_potential.base.shape):
        assert tess.region_of(piece.Z) == i
        assert tess.contains(i, piece.Z)


def test_kernel_inclusions_hold(unit_potential):
    inc = kernel_inclusions(unit_potential)
    assert inc["S(Z1) in R1"] and inc["S(Z2) in R2"]
    assert inc["S(Z3) in R3uR4"] and inc["S(Z4) in R3uR4"]
    assert not inc["S(Z3) in R3"]


@pytest.mark.parametrize("u", [1.0, 0.5, 0.1, 0.01])
def test_kernel_width_is_admissible(u):
    ell = choose_kernel_width()
    assert ell <= kernel_width_bound(u)
    inc = kernel_inclusions(MollifiedPotential(build_pwl(u, 1.0), ell))
    assert all(v for k, v in inc.items() if k != "S(Z3) in R3")


def test_weights_against_monte_carlo(unit_potential):
    rng = np.random.default_rng(0)
    m = unit_potential
    verts = [v for _, v in m.tessellation.vertices()]
    centers = [np.array(verts[i % len(verts)]) + rng.uniform(-0.1, 0.1, 2) for i in range(10)]
    centers += [np.array(m.base.shape[i % 4].Z, dtype=float) + rng.uniform(-0.2, 0.2, 2) for i in range(10)]
    n = 10**6
    for c in centers:
        w = np.array([float(v) for v in m.weights(c)])
        mc = monte_carlo_fractions(m.base, c, m.ell, n, rng)
        sigma = np.sqrt(np.maximum(w * (1 - w), 1e-12) / n)
        assert np.all(np.abs(mc - w) <= 3 * sigma + 1e-9), (c, w, mc)


def test_exact_and_float_weights_agree(unit_potential):
    ex = unit_potential.to_exact()
    rng = np.random.default_rng(1)
    for _ in range(20):
        z = rng.uniform([-0.5, -2.0], [1.5, 0.5])
        wf = unit_potential.weights(z)
        we = ex.weights((Fraction(z[0]), Fraction(z[1])))
        assert sum(we) == 1
        np.testing.assert_allclose([float(v) for v in we], wf, atol=1e-12)


def test_gradient_is_derivative_of_value(unit_potential):
    m = unit_potential
    rng = np.random.default_rng(2)
    step = 1e-5 * m.ell
    for _ in range(50):
        z = rng.uniform([-0.5, -2.0], [1.5, 0.5])
        fd = [
            (mollified_value(m, z + step * e) - mollified_value(m, z - step * e)) / (2 * step)
            for e in np.eye(2)
        ]
        np.testing.assert_allclose(fd, mollified_gradient(m, z), atol=1e-6)


def test_cocoercive_and_convex(unit_potential):
    m = unit_potential
    L = float(m.base.lipschitz) * effective_lipschitz(m, pairs=500).constant / m.ell
    rng = np.random.default_rng(3)
    for _ in range(300):
        a, b = rng.uniform([-0.5, -2.0], [1.5, 0.5], size=(2, 2))
        ga, gb = m.shape_gradient(a), m.shape_gradient(b)
        dg = ga - gb
        assert dg @ dg / L <= dg @ (a - b) + 1e-9
        assert m.value((a + b) / 2) <= (m.value(a) + m.value(b)) / 2 + 1e-9


def test_gradient_jump_constant_value():
    # the largest jump is between the first and the fourth plane: |G1 - G4| / L' = |(u^2/64, 1 - u/8)|
    p = build_pwl(1.0, 1.0)
    assert gradient_jump_constant(p) == pytest.approx(np.hypot(1 / 64, 7 / 8), rel=1e-12)


def test_lipschitz_scales_linearly_in_lprime():
    ell = choose_kernel_width()
    a = effective_lipschitz(MollifiedPotential(build_pwl(0.5, 1.0), ell), pairs=2000).estimate
    b = effective_lipschitz(MollifiedPotential(build_pwl(1.0, 0.5), ell), pairs=2000).estimate
    assert b / a == pytest.approx(2.0, rel=0.05)


def test_calibrated_potential_is_l_smooth():
    m = build_counterexample_potential(1.0, 2.0)
    assert float(m.base.lipschitz) * 2.0 <= 1
    est = effective_lipschitz(m, pairs=1000)
    assert est.estimate <= 1.0


def test_alpha_stable_across_steps():
    a1 = calibrated_alpha(1.0)
    a2 = calibrated_alpha(1.0, 0.1 / a1)
    assert a2 == pytest.approx(a1, rel=0.05)


def test_counterexample_rejects_large_step():
    with pytest.raises(DomainError):
        build_counterexample_potential(1.0, 10.0)


def test_witness_at_unit_product():
    a = calibrated_alpha(1.0)
    w = witness_noncontractivity(1.0, 1.0 / a)
    assert w.ratio > 1
    assert w.excess == pytest.approx(w.formula_excess, abs=1e-15)
    assert w.lam > 0.5 and w.mu > 0.5
    assert w.nu == pytest.approx(w.mu - (1 - w.lam), abs=1e-15)


def test_exports(tmp_path, unit_potential):
    rows = export_grid_csv(unit_potential, tmp_path / "g.csv", n=5).read_text().splitlines()
    assert rows[0] == "x,y,V,dVdx,dVdy" and len(rows) == 26
    text = export_tessellation_csv(unit_potential.base, tmp_path / "t.csv").read_text()
    assert text.count("anchor") == 4 and "edge" in text
    svg = tessellation_svg(unit_potential.base)
    assert svg.startswith("<svg") and svg.count("<circle") == 4


def test_tessellation_regions_cover_plane():
    tess = tessellate(build_pwl(1.0, 1.0))
    rng = np.random.default_rng(4)
    for z in rng.uniform(-5, 5, size=(200, 2)):
        i = tess.region_of(z)
        assert tess.contains(i, z, tol=1e-12)
