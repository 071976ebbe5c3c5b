import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rkcontract.certify import pairwise_contraction_identity_check
from rkcontract.core import runge_tableau
from rkcontract.counterexample import (
    bounded_rescaling,
    check_constraints,
    Configuration,
    dilation,
    expanding_configuration,
    figure_data,
    figure_svg,
    fit_cubic_coefficient,
    growth_formula,
    maximize_dilation,
    reduced_maximization,
    transform,
)
from rkcontract.errors import DomainError, ShapeError
from rkcontract.integrate import random_orthogonal


def test_closed_form_at_l2_h1():
    c = expanding_configuration(2.0, 1.0)
    np.testing.assert_array_equal(c.k0, [0, -3])
    np.testing.assert_array_equal(c.kt0, [-1, -2])
    np.testing.assert_array_equal(c.kh, [0, -1])
    np.testing.assert_array_equal(c.kth, [0.125, -1.5])
    np.testing.assert_array_equal(c.x1, [0, -1])
    # x1~ = x0~ + h kh~ = [1.125, -1.5]
    np.testing.assert_array_equal(c.xt1, [1.125, -1.5])
    assert dilation(c) == 1.515625
    assert check_constraints(c).all_satisfied


def test_positions_follow_the_step():
    L, h = 1.3, 0.7
    c = expanding_configuration(L, h)
    np.testing.assert_allclose(c.xh, [0, -1.5])
    np.testing.assert_allclose(c.xth, [1 - L * h / 4, -1.5 + L * h / 4])
    np.testing.assert_allclose(c.x1, [0, -3 + L * h])
    np.testing.assert_allclose(c.xt1, [1 + (L * h) ** 3 / 64, -3 + L * h - (L * h) ** 2 / 8])


def test_constraint_slacks_closed_form():
    # with L = 1: slack1 = 0, slack3 = 1/2, slack6 = 3/4 for every h
    for h in (0.01, 0.5, 2.0):
        s = check_constraints(expanding_configuration(1.0, h)).slacks
        assert s[0] == pytest.approx(0, abs=1e-9)
        assert s[2] == pytest.approx(0.5, abs=1e-9)
        assert s[5] == pytest.approx(0.75, abs=1e-9)


@pytest.mark.parametrize("u, ok", [(1.0, True), (3.0, True), (5.0, False), (10.0, True)])
def test_feasibility_window(u, ok):
    # slack5 = -(u - 8)(u^3 - 8u^2 - 64u + 256) / 4096 is negative only for u in about (3.2, 8)
    rep = check_constraints(expanding_configuration(1.0, u))
    assert rep.all_satisfied == ok
    assert rep.slacks[4] == pytest.approx(-(u - 8) * (u**3 - 8 * u**2 - 64 * u + 256) / 4096, abs=1e-9)


def test_zero_slopes_feasible():
    z = np.zeros(2)
    c = Configuration.from_slopes(z, [1.0, 0.0], z, z, z, z, 1.0, 0.5)
    assert check_constraints(c).all_satisfied
    assert dilation(c) == 1.0


def test_dilation_rejects_coincident_points():
    z = np.zeros(2)
    c = Configuration.from_slopes(z, z, z, z, z, z, 1.0, 0.5)
    with pytest.raises(DomainError):
        dilation(c)


def test_shape_mismatch():
    with pytest.raises(ShapeError):
        Configuration.from_slopes([0, 0], [1, 0, 0], [0, 0], [0, 0], [0, 0], [0, 0], 1.0, 1.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 10), st.floats(0.01, 1))
def test_dilation_matches_growth_formula(L, frac):
    h = 3 * frac / L
    c = expanding_configuration(L, h)
    assert dilation(c) == pytest.approx(growth_formula(L, h), abs=1e-12)
    assert dilation(c) > 1


def test_small_step_leading_term():
    for u in (1e-1, 1e-2):
        c = expanding_configuration(1.0, u)
        assert (dilation(c) - 1) / u**3 == pytest.approx(1 / 32, rel=u)


@pytest.mark.parametrize("seed", range(5))
def test_scaling_and_isometry_invariance(seed):
    rng = np.random.default_rng(seed)
    c = expanding_configuration(1.0, 0.8)
    lam = rng.uniform(0.1, 5)
    moved = transform(c, scale=lam, rotation=random_orthogonal(2, rng), shift=rng.standard_normal(2))
    assert dilation(moved) == pytest.approx(dilation(c), abs=1e-12)
    # every slack is quadratic in (points, slopes)
    np.testing.assert_allclose(
        check_constraints(moved).slacks, lam**2 * np.array(check_constraints(c).slacks), atol=1e-10
    )
    assert check_constraints(moved).all_satisfied


def test_bounded_rescaling_keeps_ratio():
    c = expanding_configuration(2.0, 0.25)
    r = bounded_rescaling(c)
    assert dilation(r) == pytest.approx(dilation(c), abs=1e-12)
    assert np.max(np.abs(r.k0)) <= 3.0


def test_identity_on_configuration():
    c = expanding_configuration(2.0, 1.0)
    res = pairwise_contraction_identity_check(
        runge_tableau(), c.h, [c.k0, c.kh], [c.kt0, c.kth], c.x0, c.xt0
    )
    assert res < 1e-10


def test_json_round_trip_is_exact():
    c = expanding_configuration(0.3, 0.7)
    back = Configuration.from_json(c.to_json())
    for name in ("x0", "xt1", "kth"):
        np.testing.assert_array_equal(getattr(back, name), getattr(c, name))


def test_figure_data_arrows_scaled():
    c = expanding_configuration(2.0, 1.0)
    rows = {r["name"]: r for r in figure_data(c)}
    np.testing.assert_array_equal([rows["kth"]["dx"], rows["kth"]["dy"]], 0.8 * c.kth)
    np.testing.assert_array_equal([rows["kth"]["x"], rows["kth"]["y"]], c.xth)
    assert figure_svg(c).count("<line") == 4


def test_search_one_dimension_contractive():
    res = maximize_dilation(1.0, 0.05, d=1, seed=0)
    assert res.ratio <= 1 + 1e-8


def test_search_beats_warm_start():
    c = expanding_configuration(1.0, 0.05)
    res = maximize_dilation(1.0, 0.05, d=2, seed=0, starts=4, warm_start=c)
    assert res.ratio >= dilation(c)
    assert check_constraints(res.configuration).all_satisfied


def test_search_deterministic_across_threads():
    a = maximize_dilation(1.0, 0.02, d=2, seed=7, starts=4, threads=1)
    b = maximize_dilation(1.0, 0.02, d=2, seed=7, starts=4, threads=4)
    assert a.objective_values == b.objective_values


def test_search_constraints_active():
    res = maximize_dilation(1.0, 0.01, d=2, seed=0)
    s = check_constraints(res.configuration).slacks
    assert abs(s[0]) < 1e-6 and abs(s[1]) < 1e-6


def test_reduced_problem_matches_angle_scan():
    """Maximize over the boundary circle of the first constraint by brute force.

    For ``D0 = (L/2)(-1 + cos t, sin t)`` the best ``Dh`` on the second
    constraint's circle gives ``|e1 + h Dh| = |v - (hL/2) w| + (hL/2)|w|``
    with ``w = e1 + (h/2) D0`` and ``v = e1``.
    """
    L, h = 1.0, 0.01
    t = np.linspace(0, 2 * np.pi, 200001)
    D0 = (L / 2) * np.column_stack([-1 + np.cos(t), np.sin(t)])
    w = np.array([1.0, 0.0]) + (h / 2) * D0
    r = h * L / 2
    vals = np.linalg.norm(np.array([1.0, 0.0]) - r * w, axis=1) + r * np.linalg.norm(w, axis=1)
    best = float(np.max(vals) ** 2)
    sol = reduced_maximization(L, h)
    assert sol.value == pytest.approx(best, abs=1e-13)
    np.testing.assert_allclose(sol.delta0, sol.leading_delta0, rtol=0.05)
    np.testing.assert_allclose(sol.delta_h, sol.leading_delta_h, rtol=0.05)
    assert max(abs(v) for v in sol.slacks) < 1e-6


def test_cubic_coefficient_independent_of_dimension():
    c2 = fit_cubic_coefficient(1.0, d=2, starts=8).coefficient
    c3 = fit_cubic_coefficient(1.0, d=3, starts=8).coefficient
    assert c3 == pytest.approx(c2, rel=0.15)
