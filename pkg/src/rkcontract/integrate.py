"""Explicit Runge-Kutta steps on gradient flows ``x' = -grad V(x)``."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from rkcontract.core import ButcherTableau
from rkcontract.errors import DomainError, ShapeError, UnsupportedError


@dataclass(frozen=True)
class GradientField:
    """A map ``x -> grad V(x)`` with optional declared Lipschitz constant.

    ``func`` must be deterministic and side-effect free; it receives a 1-D
    array and returns an array of the same length.  Object arrays of
    :class:`~fractions.Fraction` are passed through untouched so exact
    fields can be stepped exactly.
    """

    func: Callable[[np.ndarray], np.ndarray]
    dim: int
    lipschitz_bound: float | None = None
    name: str = ""

    def eval(self, x) -> np.ndarray:
        x = _as_point(x)
        if x.shape != (self.dim,):
            raise ShapeError(f"expected a point of dimension {self.dim}, got shape {x.shape}")
        g = np.asarray(self.func(x))
        if g.shape != (self.dim,):
            raise ShapeError(f"gradient has shape {g.shape}, expected ({self.dim},)")
        return g

    __call__ = eval


@dataclass(frozen=True)
class StepRecord:
    x0: np.ndarray
    x1: np.ndarray
    stage_points: tuple[np.ndarray, ...]
    slopes: tuple[np.ndarray, ...]
    h: float


def _as_point(x) -> np.ndarray:
    arr = np.asarray(x)
    if arr.dtype == object:
        return arr
    return np.atleast_1d(arr.astype(float))


def _exact(x: np.ndarray) -> bool:
    return x.dtype == object


def rk_step(t: ButcherTableau, f: GradientField, x0, h) -> StepRecord:
    """One step of an explicit RK method with slopes ``k_j = -grad V(X_j)``.

    When ``x0`` is an object array of fractions, ``h`` and the tableau are
    converted to fractions too (float coefficients are dyadic rationals,
    so the conversion is exact) and the whole step is carried out exactly.
    """
    if not t.explicit:
        raise UnsupportedError("rk_step integrates explicit tableaux only")
    if not h > 0:
        raise DomainError(f"step size must be positive, got {h}")
    x0 = _as_point(x0)
    if _exact(x0):
        h = Fraction(h)
        a = [[Fraction(float(v)) for v in row] for row in t.a]
        b = [Fraction(float(v)) for v in t.b]
    else:
        h = float(h)
        a, b = t.a, t.b
    stages: list[np.ndarray] = []
    slopes: list[np.ndarray] = []
    for i in range(t.s):
        X = x0.copy()
        for j in range(i):
            if a[i][j] != 0:
                X = X + (h * a[i][j]) * slopes[j]
        stages.append(X)
        slopes.append(-f.eval(X))
    x1 = x0.copy()
    for j in range(t.s):
        if b[j] != 0:
            x1 = x1 + (h * b[j]) * slopes[j]
    return StepRecord(x0=x0, x1=x1, stage_points=tuple(stages), slopes=tuple(slopes), h=h)


def contraction_ratio(t: ButcherTableau, f: GradientField, x0, x0_tilde, h) -> float:
    """``|x1~ - x1|^2 / |x0~ - x0|^2`` after one step from each point."""
    x0 = _as_point(x0)
    xt0 = _as_point(x0_tilde)
    d0 = xt0 - x0
    den = sum(v * v for v in d0)
    if den == 0:
        raise DomainError("initial points coincide")
    d1 = rk_step(t, f, xt0, h).x1 - rk_step(t, f, x0, h).x1
    return sum(v * v for v in d1) / den


def zero_field(dim: int) -> GradientField:
    return GradientField(lambda x: np.zeros_like(x) if x.dtype != object else x * 0, dim, 0.0, "zero")


def quadratic_field(Q) -> GradientField:
    """Gradient of ``V(x) = <Q x, x> / 2`` for symmetric PSD ``Q``."""
    Q = np.array(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise ShapeError("Q must be square")
    Q.flags.writeable = False
    lip = float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (Q + Q.T))))) if Q.size else 0.0
    return GradientField(lambda x: Q @ x, Q.shape[0], lip, "quadratic")


def random_quadratic_field(dim: int, L: float, rng: np.random.Generator) -> GradientField:
    """``Q = U^T diag(lam) U`` with ``lam ~ U[0, L]`` and Haar-random ``U``."""
    lam = rng.uniform(0.0, L, size=dim)
    U = random_orthogonal(dim, rng)
    Q = U.T @ np.diag(lam) @ U
    Q = 0.5 * (Q + Q.T)
    field = quadratic_field(Q)
    return GradientField(field.func, dim, float(L), "random-quadratic")


def random_orthogonal(dim: int, rng: np.random.Generator) -> np.ndarray:
    A = rng.standard_normal((dim, dim))
    Qm, R = np.linalg.qr(A)
    return Qm * np.sign(np.diag(R))


def conjugate_field(f: GradientField, U: np.ndarray, shift) -> GradientField:
    """Field of ``V(U^T (y - shift))``, i.e. ``V`` moved by the isometry ``x -> U x + shift``."""
    U = np.asarray(U, dtype=float)
    shift = np.asarray(shift, dtype=float)
    return GradientField(
        lambda y: U @ f.eval(U.T @ (y - shift)), f.dim, f.lipschitz_bound, f.name + "-moved"
    )


def spot_check_lipschitz(
    f: GradientField, rng: np.random.Generator, n: int = 200, radius: float = 1.0
) -> float:
    """Largest observed ``|grad V(x) - grad V(y)| / |x - y|`` on random pairs."""
    worst = 0.0
    for _ in range(n):
        x = rng.normal(scale=radius, size=f.dim)
        y = rng.normal(scale=radius, size=f.dim)
        dist = np.linalg.norm(x - y)
        if dist > 0:
            worst = max(worst, float(np.linalg.norm(f.eval(x) - f.eval(y)) / dist))
    return worst


def trajectory(t: ButcherTableau, f: GradientField, x0, h: float, steps: int) -> np.ndarray:
    """Array of shape ``(steps + 1, dim)`` with the iterates."""
    xs = [_as_point(x0).astype(float)]
    for _ in range(steps):
        xs.append(rk_step(t, f, xs[-1], h).x1)
    return np.array(xs)


def write_trajectory_csv(path: str | Path, xs: np.ndarray, h: float) -> Path:
    """Write rows ``t, x1, ..., xd``."""
    path = Path(path)
    xs = np.atleast_2d(xs)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"x{i + 1}" for i in range(xs.shape[1])])
        for n, x in enumerate(xs):
            writer.writerow([repr(n * h)] + [repr(float(v)) for v in x])
    return path


def compose_euler_steps(f: GradientField, x0, sizes: Sequence[float]) -> np.ndarray:
    """Apply plain Euler steps of the given sizes one after another."""
    x = _as_point(x0).astype(float)
    for size in sizes:
        if size:
            x = x - size * f.eval(x)
    return x
