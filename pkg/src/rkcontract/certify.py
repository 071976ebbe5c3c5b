"""Positive-semidefiniteness certificates and intervals of convex contractivity.

If all weights are nonnegative and ``mbar(h)`` is positive semidefinite,
one RK step of size ``h`` is non-expansive for every convex L-smooth
potential.  :func:`contractivity_interval` finds the largest ``(0, h_max]``
on which that certificate holds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from rkcontract.core import (
    ButcherTableau,
    build_tableau,
    euler_chain_tableau,
    m_matrix,
    mbar_matrix,
)
from rkcontract.errors import PreconditionError, ShapeError

SYMMETRY_TOL = 1e-12
GRID_POINTS = 256
BISECTION_STEPS = 60
# rounding-level slack used when locating the boundary of the PSD set
ROUNDING_TOL = 16 * np.finfo(float).eps


@dataclass(frozen=True)
class PsdVerdict:
    is_psd: bool
    min_eigenvalue: float
    tolerance_used: float


@dataclass(frozen=True)
class ContractivityInterval:
    """Result of an interval search.

    ``h_max`` is ``None`` when the interval is empty and ``math.inf`` when
    the certificate held at the search cap and at larger random samples.
    ``disconnected`` lists grid steps beyond ``h_max`` that were certified
    again after the first failure.
    """

    h_max: float | None
    L: float
    min_eig_samples: tuple[tuple[float, float], ...] = field(default=(), repr=False)
    disconnected: tuple[float, ...] = ()

    @property
    def empty(self) -> bool:
        return self.h_max is None

    @property
    def unbounded(self) -> bool:
        return self.h_max is not None and math.isinf(self.h_max)

    def to_dict(self) -> dict:
        if self.h_max is None:
            h_max = None
        elif math.isinf(self.h_max):
            h_max = "inf"
        else:
            h_max = self.h_max
        return {
            "h_max": h_max,
            "empty": self.empty,
            "L": self.L,
            "min_eig_samples": [[h, e] for h, e in self.min_eig_samples],
            "disconnected": list(self.disconnected),
        }


def default_tolerance(M: np.ndarray) -> float:
    return 1e-10 * max(1.0, float(np.max(np.sum(np.abs(M), axis=1))))


def _as_symmetric(M) -> np.ndarray:
    M = np.asarray(getattr(M, "entries", M), dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {M.shape}")
    if M.size and np.max(np.abs(M - M.T)) > SYMMETRY_TOL:
        raise ShapeError("matrix is not symmetric")
    return M


def min_eigenvalue(M) -> float:
    M = _as_symmetric(M)
    return float(np.linalg.eigvalsh(M)[0])


def check_psd(M, tol: float | None = None) -> PsdVerdict:
    """Decide ``M >= 0`` from its smallest eigenvalue.

    ``tol`` defaults to ``1e-10 * max(1, ||M||_inf)``.
    """
    M = _as_symmetric(M)
    lam = float(np.linalg.eigvalsh(M)[0])
    if tol is None:
        tol = default_tolerance(M)
    return PsdVerdict(is_psd=lam >= -tol, min_eigenvalue=lam, tolerance_used=float(tol))


def _scaled_min_eig(t: ButcherTableau, h: float, L: float) -> tuple[float, float]:
    # mbar(h)/h has the same inertia as mbar(h) and does not shrink with h
    N = mbar_matrix(t, h, L).entries / h
    return float(np.linalg.eigvalsh(N)[0]), float(np.max(np.sum(np.abs(N), axis=1)))


def _certified(t: ButcherTableau, h: float, L: float) -> tuple[bool, float]:
    lam, scale = _scaled_min_eig(t, h, L)
    return lam >= -ROUNDING_TOL * max(scale, 1e-300), lam * h


def search_cap(t: ButcherTableau, L: float) -> float:
    return 10.0 * 2.0 * t.s / L


def contractivity_interval(
    t: ButcherTableau,
    L: float,
    *,
    grid: int = GRID_POINTS,
    iterations: int = BISECTION_STEPS,
    seed: int = 0,
) -> ContractivityInterval:
    """Largest ``(0, h_max]`` on which ``mbar(h)`` is certified PSD.

    A log-spaced grid over ``[1e-6, 1] * H_CAP`` (``H_CAP = 20 s / L``)
    brackets the first failure, which is then refined by bisection.  The
    certificate is evaluated on ``mbar(h)/h`` with a rounding-level
    tolerance, so a negative eigenvalue of size ``O(h^3)`` is still seen at
    small ``h``.
    """
    if not L > 0:
        raise PreconditionError("L must be positive")
    cap = search_cap(t, L)
    hs = np.geomspace(cap * 1e-6, cap, grid)
    samples = []
    passes = []
    for h in hs:
        ok, lam = _certified(t, float(h), L)
        samples.append((float(h), lam))
        passes.append(ok)
    samples_t = tuple(samples)

    if not passes[0]:
        return ContractivityInterval(None, L, samples_t)

    if all(passes):
        rng = np.random.default_rng(seed)
        larger = cap * (1.0 + 10.0 ** rng.uniform(0.0, 3.0, size=10))
        if all(_certified(t, float(h), L)[0] for h in larger):
            return ContractivityInterval(math.inf, L, samples_t)
        return ContractivityInterval(float(cap), L, samples_t)

    first_fail = passes.index(False)
    lo, hi = float(hs[first_fail - 1]), float(hs[first_fail])
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _certified(t, mid, L)[0]:
            lo = mid
        else:
            hi = mid
    disconnected = tuple(float(h) for h, ok in zip(hs[first_fail:], passes[first_fail:]) if ok)
    return ContractivityInterval(lo, L, samples_t, disconnected)


@dataclass(frozen=True)
class EulerOptimalityReport:
    """Outcome of checking the optimality bound ``h <= 2 s / L``."""

    s: int
    L: float
    h_certified: float | None
    bound: float
    within_bound: bool
    psd_at_bound: bool
    min_eig_at_bound: float
    structure_ok: bool | None
    max_weight_deviation: float | None = None
    max_coefficient_deviation: float | None = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def verify_euler_optimality(
    t: ButcherTableau, L: float, *, tol: float = 1e-8, psd_tol: float = 1e-9
) -> EulerOptimalityReport:
    """Check that certified steps never exceed ``2 s / L``.

    When ``mbar(2 s / L)`` is PSD within ``psd_tol`` the scheme must be an
    Euler chain with equal weights; that structure is checked to ``tol``.
    """
    if not t.explicit:
        raise PreconditionError("optimality check applies to explicit tableaux only")
    if np.any(t.b <= 0):
        raise PreconditionError("optimality check requires strictly positive weights")
    if not t.consistent:
        raise PreconditionError("tableau is not consistent")
    s = t.s
    bound = 2.0 * s / L
    interval = contractivity_interval(t, L)
    h_cert = interval.h_max
    within = h_cert is None or h_cert <= bound + tol
    verdict = check_psd(mbar_matrix(t, bound, L), tol=psd_tol)
    structure_ok = None
    dev_b = dev_a = None
    if verdict.is_psd:
        dev_b = float(np.max(np.abs(t.b - 1.0 / s)))
        lower = np.tril_indices(s, k=-1)
        expected = np.tile(t.b, (s, 1))[lower]
        dev_a = float(np.max(np.abs(t.a[lower] - expected))) if s > 1 else 0.0
        structure_ok = dev_b <= tol and dev_a <= tol
    return EulerOptimalityReport(
        s=s,
        L=float(L),
        h_certified=h_cert,
        bound=bound,
        within_bound=bool(within),
        psd_at_bound=verdict.is_psd,
        min_eig_at_bound=verdict.min_eigenvalue,
        structure_ok=structure_ok,
        max_weight_deviation=dev_b,
        max_coefficient_deviation=dev_a,
    )


def random_explicit_tableau(s: int, rng: np.random.Generator) -> ButcherTableau:
    """Strictly lower-triangular ``a`` uniform in ``[-1, 1]``, Dirichlet weights."""
    a = np.tril(rng.uniform(-1.0, 1.0, size=(s, s)), k=-1)
    b = rng.dirichlet(np.ones(s))
    b = b / b.sum()
    # absorb the last rounding error so that sum(b) == 1 holds to 1e-12
    b[-1] = 1.0 - b[:-1].sum()
    return build_tableau(a.tolist(), b.tolist(), name=f"random-{s}")


def euler_chain_interval(b, L: float) -> float:
    """Closed form ``2 / (L max_i b_i)`` for an Euler chain."""
    return 2.0 / (L * float(np.max(b)))


def pairwise_contraction_identity_check(t: ButcherTableau, h: float, k, k_tilde, x0, x0_tilde) -> float:
    """Residual of the algebraic identity behind the contractivity certificate.

    With stages ``X_i = x0 + h sum_j a_ij k_j`` and ``x1 = x0 + h sum_j b_j k_j``
    (and likewise for the tilde trajectory) the identity

        |x1~ - x1|^2 = |x0~ - x0|^2 + 2h sum_i b_i <dk_i, dX_i>
                       - h^2 sum_ij m_ij <dk_i, dk_j>

    holds for arbitrary slopes.  The absolute residual is returned.
    """
    k = np.atleast_2d(np.asarray(k, dtype=float))
    kt = np.atleast_2d(np.asarray(k_tilde, dtype=float))
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    xt0 = np.atleast_1d(np.asarray(x0_tilde, dtype=float))
    s, d = t.s, x0.shape[0]
    if k.shape != (s, d) or kt.shape != (s, d) or xt0.shape != (d,):
        raise ShapeError(f"expected {s} slopes of dimension {d} for each trajectory")
    X = x0 + h * t.a @ k
    Xt = xt0 + h * t.a @ kt
    x1 = x0 + h * t.b @ k
    xt1 = xt0 + h * t.b @ kt
    dk = kt - k
    gram = dk @ dk.T
    lhs = float(np.sum((xt1 - x1) ** 2))
    rhs = (
        float(np.sum((xt0 - x0) ** 2))
        + 2.0 * h * float(np.sum(t.b * np.sum(dk * (Xt - X), axis=1)))
        - h * h * float(np.sum(m_matrix(t) * gram))
    )
    return abs(lhs - rhs)


__all__ = [
    "PsdVerdict",
    "ContractivityInterval",
    "EulerOptimalityReport",
    "check_psd",
    "min_eigenvalue",
    "contractivity_interval",
    "verify_euler_optimality",
    "random_explicit_tableau",
    "euler_chain_interval",
    "euler_chain_tableau",
    "pairwise_contraction_identity_check",
]
