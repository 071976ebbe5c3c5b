"""Smooth convex potential on which Runge's method expands distances.

Construction in two stages:

1. Four tangent planes ``pi_i(z) = F_i + <G_i, z - Z_i>`` interpolate the
   slopes of the violating configuration (with ``L'`` in place of ``L``).
   Their maximum is a convex piecewise-linear potential whose regions
   ``R_i = {pi_i >= pi_j for all j}`` tessellate the plane.
2. Convolution with the box kernel of side ``ell`` makes the gradient an
   area-weighted average of the ``G_i`` and hence Lipschitz.

All four ``G_i`` share the large vertical component ``3/h``.  That common
linear part (the *drift*) is kept separate from the *shape* pieces so the
region geometry and gradient differences never lose digits to it at small
``h``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import NamedTuple

import numpy as np

from rkcontract.core import runge_tableau
from rkcontract.errors import CalibrationError, ConstructionError, DomainError, WitnessError
from rkcontract.geometry import (
    HalfPlane,
    area_and_centroid,
    clip,
    line_segment_in_box,
    square,
)
from rkcontract.integrate import GradientField, rk_step

KERNEL_SAFETY = 0.9
LIPSCHITZ_SAFETY = 0.9
KERNEL_GRID = 256
# extra small products L'h checked on top of the uniform grid
KERNEL_EXTRA_SMALL = (1e-3, 1e-4, 1e-5, 1e-6)
COLLINEAR_TOL = 1e-13
RUNGE_FAMILY = "runge-counterexample"


def _num(x, exact: bool):
    if exact:
        return x if isinstance(x, Fraction) else Fraction(x)
    return float(x)


def _vec(xs, exact: bool) -> tuple:
    return tuple(_num(x, exact) for x in xs)


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1]


@dataclass(frozen=True)
class AffinePiece:
    """Plane ``F + <G, z - Z>``."""

    Z: tuple
    G: tuple
    F: object

    def __call__(self, z):
        return self.F + self.G[0] * (z[0] - self.Z[0]) + self.G[1] * (z[1] - self.Z[1])


@dataclass(frozen=True)
class PWLConvexPotential:
    """``max_i pi_i`` stored as ``<drift, z> + max_i shape_i(z)``.

    ``pieces`` reconstructs the planes with the drift added back.
    """

    shape: tuple[AffinePiece, ...]
    drift: tuple = (0.0, 0.0)
    lipschitz: float | None = None
    h: float | None = None
    exact: bool = False
    # set when the pieces come from build_pwl, so exact copies are rebuilt from (L', h)
    family: str = ""

    @property
    def pieces(self) -> tuple[AffinePiece, ...]:
        dx, dy = self.drift
        return tuple(
            AffinePiece(p.Z, (p.G[0] + dx, p.G[1] + dy), p.F + _dot(self.drift, p.Z))
            for p in self.shape
        )

    @property
    def product(self):
        """``L' h``; region boundaries depend on nothing else."""
        return self.lipschitz * self.h

    def value(self, z):
        return _dot(self.drift, z) + max(p(z) for p in self.shape)

    def necessary_slacks(self) -> np.ndarray:
        """``F_i - pi_j(Z_i)``; the diagonal is zero by construction."""
        n = len(self.shape)
        out = np.zeros((n, n))
        for i, pi in enumerate(self.shape):
            for j, pj in enumerate(self.shape):
                if i != j:
                    out[i, j] = float(pi.F - pj(pi.Z))
        return out

    def to_exact(self) -> "PWLConvexPotential":
        if self.exact:
            return self
        if self.family == RUNGE_FAMILY:
            return build_pwl(Fraction(self.lipschitz), Fraction(self.h), exact=True)
        shape = tuple(
            AffinePiece(_vec(p.Z, True), _vec(p.G, True), _num(p.F, True)) for p in self.shape
        )
        return PWLConvexPotential(
            shape,
            _vec(self.drift, True),
            _num(self.lipschitz, True),
            _num(self.h, True),
            exact=True,
        )


def _unit_shape(u, exact: bool):
    """Anchors, unit-L' gradients and offsets as functions of ``u = L'h``."""
    one = Fraction(1) if exact else 1.0
    Z = [
        (0 * one, 0 * one),
        (one, 0 * one),
        (0 * one, -3 * one / 2),
        (one - u / 4, -3 * one / 2 + u / 4),
    ]
    g = [
        (0 * one, 0 * one),
        (one / 2, -one / 2),
        (0 * one, -one),
        (-u * u / 64, -one + u / 8),
    ]
    # F_i - (3/h) Z_i[1], divided by L'
    c = [0 * one, one / 4, 9 * one / 8, 9 * one / 8 - u / 4 + u * u / 128]
    return Z, g, c


def build_pwl(Lp, h, *, exact: bool = False) -> PWLConvexPotential:
    """Piecewise-linear convex interpolant for the Runge counterexample.

    Anchors ``Z_i``, gradients ``G_i`` and values ``F_i`` are those that
    make Runge's method, started at ``Z_1`` and ``Z_2``, reproduce the
    expanding configuration with Lipschitz constant ``Lp``.

    Raises
    ------
    DomainError
        If ``Lp <= 0``, ``h <= 0`` or ``Lp * h > 1``.
    ConstructionError
        If the interpolation data violate ``F_i > pi_j(Z_i)`` (unreachable
        for valid input).
    """
    if not Lp > 0 or not h > 0:
        raise DomainError("need L' > 0 and h > 0")
    Lp = _num(Lp, exact)
    h = _num(h, exact)
    u = Lp * h
    # compared in floating point so exact copies of float-built potentials stay valid
    if float(u) > 1:
        raise DomainError(f"construction requires L'h <= 1, got {float(u)}")
    Z, g, c = _unit_shape(u, exact)
    shape = tuple(
        AffinePiece(Z[i], (Lp * g[i][0], Lp * g[i][1]), Lp * c[i]) for i in range(4)
    )
    drift = (0 * Lp, 3 / h)
    pot = PWLConvexPotential(shape, drift, Lp, h, exact=exact, family=RUNGE_FAMILY)
    slacks = pot.necessary_slacks()
    off = ~np.eye(4, dtype=bool)
    if not np.all(slacks[off] > 0):
        raise ConstructionError("interpolation data violate the convexity condition")
    return pot


def _normalized_halfplane(nx, ny, c, exact: bool) -> HalfPlane:
    scale = max(abs(nx), abs(ny))
    if scale == 0:
        return HalfPlane(nx, ny, c)
    return HalfPlane(nx / scale, ny / scale, c / scale)


@dataclass(frozen=True)
class Tessellation:
    """Regions ``R_i`` as intersections of half-planes ``{pi_j <= pi_i}``.

    Normals are scaled to unit max-norm, so the boundary lines do not
    change when every plane is multiplied by the same factor.
    """

    regions: tuple[tuple[HalfPlane, ...], ...]
    others: tuple[tuple[int, ...], ...]
    exact: bool = False

    def __len__(self):
        return len(self.regions)

    def contains(self, i: int, z, tol=0) -> bool:
        return all(hp.excess(z) <= tol for hp in self.regions[i])

    def region_of(self, z, tol=0) -> int:
        """Index of a region containing ``z``; lowest index on ties."""
        for i in range(len(self.regions)):
            if self.contains(i, z, tol):
                return i
        # only reachable through rounding on a boundary
        return int(np.argmin([max(float(hp.excess(z)) for hp in r) for r in self.regions]))

    def boundary(self, i: int, j: int) -> HalfPlane:
        """The half-plane of ``R_i`` cut by the line shared with ``R_j``."""
        return self.regions[i][self.others[i].index(j)]

    def distance_to_boundary(self, i: int, j: int, z) -> float:
        hp = self.boundary(i, j)
        return abs(float(hp.excess(z))) / math.hypot(float(hp.nx), float(hp.ny))

    def vertices(self) -> list[tuple[tuple[int, ...], tuple[float, float]]]:
        """Points where three regions meet."""
        out = []
        n = len(self.regions)
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    a = self.boundary(i, j)
                    b = self.boundary(i, k)
                    det = float(a.nx) * float(b.ny) - float(a.ny) * float(b.nx)
                    if abs(det) < 1e-14:
                        continue
                    x = (float(a.c) * float(b.ny) - float(a.ny) * float(b.c)) / det
                    y = (float(a.nx) * float(b.c) - float(a.c) * float(b.nx)) / det
                    p = (x, y)
                    tol = 1e-9 * (1 + abs(x) + abs(y))
                    if all(self.contains(r, p, tol) for r in (i, j, k)):
                        out.append(((i, j, k), p))
        return out

    def segments(self, box) -> list[tuple[tuple[int, int], tuple, tuple]]:
        """Boundary segments clipped to ``box = (xmin, xmax, ymin, ymax)``."""
        out = []
        n = len(self.regions)
        for i in range(n):
            for j in range(i + 1, n):
                line = self.boundary(i, j)
                others = [hp for k, hp in zip(self.others[i], self.regions[i]) if k != j]
                others += [hp for k, hp in zip(self.others[j], self.regions[j]) if k != i]
                seg = line_segment_in_box(line, box, others, tol=1e-12)
                if seg is not None:
                    out.append(((i, j), seg[0], seg[1]))
        return out


def tessellate(p: PWLConvexPotential) -> Tessellation:
    """Regions of ``max_i pi_i``; drift terms cancel in every comparison."""
    regions = []
    others = []
    n = len(p.shape)
    for i, pi in enumerate(p.shape):
        planes = []
        idx = []
        off_i = pi.F - _dot(pi.G, pi.Z)
        for j, pj in enumerate(p.shape):
            if j == i:
                continue
            off_j = pj.F - _dot(pj.G, pj.Z)
            planes.append(
                _normalized_halfplane(pj.G[0] - pi.G[0], pj.G[1] - pi.G[1], off_i - off_j, p.exact)
            )
            idx.append(j)
        regions.append(tuple(planes))
        others.append(tuple(idx))
    if n == 0:
        raise ConstructionError("potential has no pieces")
    return Tessellation(tuple(regions), tuple(others), p.exact)


def _square_in_region(tess: Tessellation, i: int, center, half) -> bool:
    return all(tess.contains(i, q) for q in square(center, half))


def _max_half_width_in_region(tess: Tessellation, i: int, center) -> float:
    # for <n, z> <= c the square of half-width r fits iff <n, Z> + r |n|_1 <= c
    r = math.inf
    for hp in tess.regions[i]:
        n1 = abs(float(hp.nx)) + abs(float(hp.ny))
        if n1 > 0:
            r = min(r, -float(hp.excess(center)) / n1)
    return r


def region_areas(tess: Tessellation, center, half, tol=0.0) -> list:
    """Areas and centroids of ``S(center) ∩ R_i`` for every region."""
    corners = square(center, half)
    full = (2 * half) * (2 * half)
    out = []
    for planes in tess.regions:
        poly = corners
        empty = False
        for hp in planes:
            vals = [hp.excess(q) for q in poly]
            if all(v <= tol for v in vals):
                continue
            if all(v >= -tol for v in vals):
                empty = True
                break
            poly = clip(poly, hp, tol)
            if len(poly) < 3:
                empty = True
                break
        if empty:
            out.append((0 * full, None))
        elif poly is corners:
            out.append((full, tuple(center)))
        else:
            out.append(area_and_centroid(poly))
    return out


@dataclass(frozen=True)
class MollifiedPotential:
    """``V = chi * Vhat`` with ``chi`` the normalized indicator of a square.

    ``S(z)`` is the closed square of side ``ell`` centered at ``z`` (the
    sup-norm ball of radius ``ell / 2``).
    """

    base: PWLConvexPotential
    ell: float
    alpha: float | None = None
    target_lipschitz: float | None = None
    tessellation: Tessellation = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.ell > 0:
            raise DomainError("kernel width must be positive")
        object.__setattr__(self, "tessellation", tessellate(self.base))

    @property
    def exact(self) -> bool:
        return self.base.exact

    @property
    def half(self):
        return _num(self.ell, self.exact) / 2

    def _point(self, z) -> tuple:
        return (_num(z[0], self.exact), _num(z[1], self.exact))

    def _tol(self):
        return 0 if self.exact else COLLINEAR_TOL * float(self.ell)

    def pieces_in_square(self, z) -> list:
        return region_areas(self.tessellation, self._point(z), self.half, self._tol())

    def weights(self, z) -> list:
        """Area fractions of ``S(z)`` in each region."""
        full = _num(self.ell, self.exact) ** 2
        return [a / full for a, _ in self.pieces_in_square(z)]

    def shape_gradient(self, z) -> np.ndarray:
        """Gradient without the drift term; use it for gradient differences."""
        w = self.weights(z)
        gx = sum(wi * p.G[0] for wi, p in zip(w, self.base.shape))
        gy = sum(wi * p.G[1] for wi, p in zip(w, self.base.shape))
        if self.exact:
            return np.array([gx, gy], dtype=object)
        return np.array([gx, gy], dtype=float)

    def gradient(self, z) -> np.ndarray:
        """``drift + sum_i area(S(z) ∩ R_i) / ell^2 * G_i``."""
        g = self.shape_gradient(z)
        dx, dy = self.base.drift
        return g + np.array([dx, dy], dtype=object if self.exact else float)

    def value(self, z):
        """Convolution value; each affine piece integrates to area times its centroid value."""
        zz = self._point(z)
        full = _num(self.ell, self.exact) ** 2
        acc = 0
        for (a, cen), piece in zip(self.pieces_in_square(zz), self.base.shape):
            if cen is not None and a != 0:
                acc += a * piece(cen)
        return _dot(self.base.drift, zz) + acc / full

    def field(self) -> GradientField:
        return GradientField(self.gradient, 2, self.target_lipschitz, "mollified")

    def to_exact(self) -> "MollifiedPotential":
        return MollifiedPotential(
            self.base.to_exact(), Fraction(self.ell), self.alpha, self.target_lipschitz
        )


def mollified_gradient(m: MollifiedPotential, z) -> np.ndarray:
    return m.gradient(z)


def mollified_value(m: MollifiedPotential, z):
    return m.value(z)


def kernel_width_bound(u: float) -> float:
    """Largest ``ell`` with the four square inclusions at ``L'h = u``."""
    pot = build_pwl(1.0, u)
    tess = tessellate(pot)
    Z = [p.Z for p in pot.shape]
    r1 = _max_half_width_in_region(tess, 0, Z[0])
    r2 = _max_half_width_in_region(tess, 1, Z[1])

    def avoids_top(center, r) -> bool:
        areas = region_areas(tess, center, r)
        return float(areas[0][0]) + float(areas[1][0]) <= 1e-14 * (2 * r) ** 2

    def largest(center) -> float:
        lo, hi = 0.0, 4.0
        if avoids_top(center, hi):
            return hi
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if avoids_top(center, mid):
                lo = mid
            else:
                hi = mid
        return lo

    r3 = largest(Z[2])
    r4 = largest(Z[3])
    return 2.0 * min(r1, r2, r3, r4)


def kernel_grid(grid: int = KERNEL_GRID) -> np.ndarray:
    return np.concatenate([np.array(KERNEL_EXTRA_SMALL), np.arange(1, grid + 1) / grid])


@lru_cache(maxsize=8)
def choose_kernel_width(grid: int = KERNEL_GRID, safety: float = KERNEL_SAFETY) -> float:
    """Kernel width valid for every ``L'h`` in ``(0, 1]``.

    Takes the smallest admissible width over a uniform grid of ``L'h``
    (plus a few tiny values) and applies a safety multiplier.
    """
    bounds = [kernel_width_bound(float(u)) for u in kernel_grid(grid)]
    ell = safety * min(bounds)
    if not ell > 0:
        raise ConstructionError("no admissible kernel width")
    return ell


def kernel_inclusions(m: MollifiedPotential) -> dict:
    """Check ``S(Z1) ⊂ R1``, ``S(Z2) ⊂ R2`` and ``S(Z3), S(Z4) ⊂ R3 ∪ R4``."""
    tess = m.tessellation
    Z = [p.Z for p in m.base.shape]
    half = m.half
    out = {
        "S(Z1) in R1": _square_in_region(tess, 0, Z[0], half),
        "S(Z2) in R2": _square_in_region(tess, 1, Z[1], half),
    }
    for k in (2, 3):
        areas = m.pieces_in_square(Z[k])
        out[f"S(Z{k + 1}) in R3uR4"] = float(areas[0][0]) == 0 and float(areas[1][0]) == 0
    out["S(Z3) in R3"] = _square_in_region(tess, 2, Z[2], half)
    return out


class LipschitzEstimate(NamedTuple):
    estimate: float
    constant: float  # estimate * ell / L'
    grid_max: float
    pairs_max: float


def _sample_box(m: MollifiedPotential):
    pts = [tuple(map(float, p.Z)) for p in m.base.shape]
    pts += [v for _, v in m.tessellation.vertices()]
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    pad = 2.0 * float(m.ell)
    return min(xs) - pad, max(xs) + pad, min(ys) - pad, max(ys) + pad


def effective_lipschitz(
    m: MollifiedPotential, *, divisions: int = 20, pairs: int = 10_000, seed: int = 0
) -> LipschitzEstimate:
    """Empirical upper estimate of the Lipschitz constant of ``grad V``.

    Difference quotients over a grid of spacing ``ell / divisions`` (axis
    and diagonal neighbours) covering the anchors and the tessellation
    vertices with a ``2 ell`` margin, plus random pairs at distance
    ``ell / 100``.
    """
    if m.exact:
        m = MollifiedPotential(m.base, float(m.ell))
    ell = float(m.ell)
    xmin, xmax, ymin, ymax = _sample_box(m)
    step = ell / divisions
    xs = np.arange(xmin, xmax + step, step)
    ys = np.arange(ymin, ymax + step, step)
    G = np.empty((len(xs), len(ys), 2))
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            G[i, j] = m.shape_gradient((x, y))
    grid_max = 0.0
    neighbours = (
        (G[1:, :], G[:-1, :], step),
        (G[:, 1:], G[:, :-1], step),
        (G[1:, 1:], G[:-1, :-1], step * math.sqrt(2)),
        (G[1:, :-1], G[:-1, 1:], step * math.sqrt(2)),
    )
    for a, b, dist in neighbours:
        if a.size:
            grid_max = max(grid_max, float(np.linalg.norm(a - b, axis=-1).max()) / dist)
    rng = np.random.default_rng(seed)
    sep = ell / 100
    pairs_max = 0.0
    centers = np.column_stack([rng.uniform(xmin, xmax, pairs), rng.uniform(ymin, ymax, pairs)])
    angles = rng.uniform(0.0, 2 * math.pi, pairs)
    for c, th in zip(centers, angles):
        off = 0.5 * sep * np.array([math.cos(th), math.sin(th)])
        diff = np.linalg.norm(m.shape_gradient(c + off) - m.shape_gradient(c - off))
        pairs_max = max(pairs_max, float(diff) / sep)
    est = max(grid_max, pairs_max)
    Lp = float(m.base.lipschitz) if m.base.lipschitz else 1.0
    return LipschitzEstimate(est, est * ell / Lp, grid_max, pairs_max)


@lru_cache(maxsize=64)
def _unit_lipschitz_constant(u: float, ell: float) -> float:
    # the constant C with Lip(grad V) = C L' / ell depends on L'h only
    m = MollifiedPotential(build_pwl(1.0, u), ell)
    return effective_lipschitz(m).constant


def build_counterexample_potential(L: float, h: float, *, ell: float | None = None) -> MollifiedPotential:
    """L-smooth convex potential on which Runge's method is not contractive.

    The safety factor ``alpha = L'/L`` is calibrated from the measured
    Lipschitz constant: ``alpha = 0.9 L / Lip`` for the potential built at
    ``L' = L``, then the potential is rebuilt at ``L' = alpha L`` and
    re-measured.  One further correction round is allowed.

    Raises
    ------
    DomainError
        If ``alpha L h > 1`` (the step is too large for the construction).
    CalibrationError
        If the rebuilt potential still measures above ``L``.
    """
    if not L > 0 or not h > 0:
        raise DomainError("need L > 0 and h > 0")
    if ell is None:
        ell = choose_kernel_width()
    u_cal = min(L * h, 1.0)
    alpha = LIPSCHITZ_SAFETY * ell / _unit_lipschitz_constant(u_cal, ell)
    for _ in range(2):
        Lp = alpha * L
        if Lp * h > 1:
            raise DomainError(
                f"step too large: L'h = {Lp * h:.6g} > 1 with calibrated alpha = {alpha:.6g}"
            )
        measured = L * alpha * _unit_lipschitz_constant(float(Lp * h), ell) / ell
        if measured <= L:
            return MollifiedPotential(build_pwl(Lp, h), ell, alpha=alpha, target_lipschitz=L)
        alpha *= LIPSCHITZ_SAFETY * L / measured
    raise CalibrationError("measured Lipschitz constant stays above target after recalibration")


def calibrated_alpha(L: float = 1.0, h: float | None = None) -> float:
    """Safety factor the calibration picks for ``(L, h)`` (``h`` defaults to ``1/L``)."""
    h = 1.0 / L if h is None else h
    return build_counterexample_potential(L, h).alpha


class WitnessResult(NamedTuple):
    ratio: float
    nu: float
    lam: float
    mu: float
    excess: float
    formula_excess: float
    delta: tuple
    L_prime: float
    h: float
    ell: float
    alpha: float | None
    exact_ratio: Fraction


def witness_noncontractivity(
    L: float, h: float, *, potential: MollifiedPotential | None = None
) -> WitnessResult:
    """Run Runge's method from ``Z1`` and ``Z2`` on the calibrated potential.

    The step is carried out in exact rational arithmetic, so the expansion
    ``|x1~ - x1|^2 > 1`` is certified even when it is far below double
    precision.  The measured ratio must equal

        1 + nu L'^3 h^3 / 32 + nu^2 L'^4 h^4 / 64 + nu^2 L'^6 h^6 / 4096,

    with ``lam``, ``mu`` the area fractions of ``S(Z3) ∩ R3`` and
    ``S(Z4) ∩ R4`` and ``nu = mu - (1 - lam)``.

    Raises
    ------
    WitnessError
        If the ratio does not exceed one or disagrees with the formula.
    """
    m = potential if potential is not None else build_counterexample_potential(L, h)
    ex = m.to_exact()
    Lp = ex.base.lipschitz
    hq = Fraction(h)
    if hq != ex.base.h:
        raise DomainError("potential was built for a different step size")
    Z = [p.Z for p in ex.base.shape]
    fld = ex.field()
    x0 = np.array(Z[0], dtype=object)
    xt0 = np.array(Z[1], dtype=object)
    rk = runge_tableau()
    step = rk_step(rk, fld, x0, hq)
    step_t = rk_step(rk, fld, xt0, hq)
    if tuple(step.stage_points[1]) != Z[2] or tuple(step_t.stage_points[1]) != Z[3]:
        raise WitnessError("midpoint stages did not land on Z3 and Z4")
    lam = ex.weights(Z[2])[2]
    mu = ex.weights(Z[3])[3]
    nu = mu - (1 - lam)
    delta = step_t.x1 - step.x1
    d0 = xt0 - x0
    ratio = (delta[0] ** 2 + delta[1] ** 2) / (d0[0] ** 2 + d0[1] ** 2)
    u = Lp * hq
    formula = nu * u**3 / 32 + nu**2 * u**4 / 64 + nu**2 * u**6 / 4096
    excess = ratio - 1
    if not excess > 0:
        raise WitnessError(f"no expansion: ratio - 1 = {float(excess)}")
    if excess != formula:
        raise WitnessError("ratio disagrees with the area-fraction formula")
    return WitnessResult(
        ratio=float(ratio),
        nu=float(nu),
        lam=float(lam),
        mu=float(mu),
        excess=float(excess),
        formula_excess=float(formula),
        delta=(float(delta[0]), float(delta[1])),
        L_prime=float(Lp),
        h=float(hq),
        ell=float(m.ell),
        alpha=m.alpha,
        exact_ratio=ratio,
    )


def gradient_jump_constant(p: PWLConvexPotential) -> float:
    """``max ||G_i - G_j|| / L'`` over regions sharing a boundary segment."""
    tess = tessellate(p)
    box = (-50.0, 50.0, -50.0, 50.0)
    worst = 0.0
    for (i, j), _, _ in tess.segments(box):
        gi, gj = p.shape[i].G, p.shape[j].G
        worst = max(worst, math.hypot(float(gi[0] - gj[0]), float(gi[1] - gj[1])))
    return worst / float(p.lipschitz)


def export_grid_csv(m: MollifiedPotential, path: str | Path, n: int = 41) -> Path:
    """Rows ``x, y, V, dVdx, dVdy`` on an ``n x n`` grid around the anchors."""
    xmin, xmax, ymin, ymax = _sample_box(m)
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "V", "dVdx", "dVdy"])
        for x in np.linspace(xmin, xmax, n):
            for y in np.linspace(ymin, ymax, n):
                g = m.gradient((x, y))
                w.writerow([repr(float(x)), repr(float(y)), repr(float(m.value((x, y)))),
                            repr(float(g[0])), repr(float(g[1]))])
    return path


def tessellation_segments(p: PWLConvexPotential, box=(-1.0, 2.0, -2.5, 1.0)) -> list:
    return tessellate(p).segments(box)


def export_tessellation_csv(p: PWLConvexPotential, path: str | Path, box=(-1.0, 2.0, -2.5, 1.0)) -> Path:
    """Rows ``kind, i, j, x0, y0, x1, y1`` (segments) and anchor points."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kind", "i", "j", "x0", "y0", "x1", "y1"])
        for (i, j), a, b in tessellation_segments(p, box):
            w.writerow(["edge", i + 1, j + 1, repr(a[0]), repr(a[1]), repr(b[0]), repr(b[1])])
        for i, piece in enumerate(p.shape):
            z = tuple(map(float, piece.Z))
            w.writerow(["anchor", i + 1, "", repr(z[0]), repr(z[1]), "", ""])
    return path


def tessellation_svg(p: PWLConvexPotential, box=(-1.0, 2.0, -2.5, 1.0), size: int = 400) -> str:
    xmin, xmax, ymin, ymax = box
    sx = size / (xmax - xmin)
    sy = size / (ymax - ymin)

    def tx(x, y):
        return (x - xmin) * sx, (ymax - y) * sy

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    for (i, j), a, b in tessellation_segments(p, box):
        (x0, y0), (x1, y1) = tx(*a), tx(*b)
        parts.append(
            f'<line x1="{x0:.3f}" y1="{y0:.3f}" x2="{x1:.3f}" y2="{y1:.3f}" '
            f'stroke="black" stroke-width="1.5"><title>R{i + 1}|R{j + 1}</title></line>'
        )
    for i, piece in enumerate(p.shape):
        x, y = tx(float(piece.Z[0]), float(piece.Z[1]))
        parts.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="3" fill="red"/>')
        parts.append(f'<text x="{x + 5:.3f}" y="{y - 5:.3f}" font-size="12">Z{i + 1}</text>')
    parts.append("</svg>")
    return "\n".join(parts)
