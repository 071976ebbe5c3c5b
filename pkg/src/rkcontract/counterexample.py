"""Worst-case configurations for Runge's method on convex L-smooth gradients.

The four slopes ``k0, k0~, kh, kh~`` are treated as free vectors subject
only to the six pairwise cocoercivity inequalities

    (1/L) |k_a - k_b|^2 <= -<k_a - k_b, x_a - x_b>

between the points where they are evaluated.  Any configuration with
``|x1~ - x1| > |x0~ - x0|`` rules out contractivity certificates that rely
on those inequalities alone.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize

from rkcontract.errors import DomainError, ShapeError

FEASIBILITY_TOL = 1e-12

CONSTRAINT_PAIRS = (
    # (slope a, slope b, point a, point b)
    ("kt0", "k0", "xt0", "x0"),
    ("kth", "kh", "xth", "xh"),
    ("kh", "k0", "xh", "x0"),
    ("kth", "kt0", "xth", "xt0"),
    ("kth", "k0", "xth", "x0"),
    ("kh", "kt0", "xh", "xt0"),
)


@dataclass(frozen=True)
class Configuration:
    """Points and slopes of one Runge step from two initial points.

    ``xh = x0 + h/2 k0``, ``x1 = x0 + h kh`` and likewise with tildes
    (``t`` in attribute names).
    """

    x0: np.ndarray
    xt0: np.ndarray
    xh: np.ndarray
    xth: np.ndarray
    x1: np.ndarray
    xt1: np.ndarray
    k0: np.ndarray
    kt0: np.ndarray
    kh: np.ndarray
    kth: np.ndarray
    L: float
    h: float

    @classmethod
    def from_slopes(cls, x0, xt0, k0, kt0, kh, kth, L, h) -> "Configuration":
        x0, xt0, k0, kt0, kh, kth = (np.asarray(v, dtype=float) for v in (x0, xt0, k0, kt0, kh, kth))
        shapes = {v.shape for v in (x0, xt0, k0, kt0, kh, kth)}
        if len(shapes) != 1 or x0.ndim != 1:
            raise ShapeError("all points and slopes must be vectors of one dimension")
        if not L > 0 or not h > 0:
            raise DomainError("need L > 0 and h > 0")
        return cls(
            x0=x0,
            xt0=xt0,
            xh=x0 + 0.5 * h * k0,
            xth=xt0 + 0.5 * h * kt0,
            x1=x0 + h * kh,
            xt1=xt0 + h * kth,
            k0=k0,
            kt0=kt0,
            kh=kh,
            kth=kth,
            L=float(L),
            h=float(h),
        )

    @property
    def dim(self) -> int:
        return self.x0.shape[0]

    def to_dict(self) -> dict:
        # repr of a float is the shortest decimal string that round-trips exactly
        out = {name: [repr(float(v)) for v in getattr(self, name)] for name in _VECTOR_FIELDS}
        out["L"] = repr(self.L)
        out["h"] = repr(self.h)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, doc: dict) -> "Configuration":
        vals = {name: np.array([float(v) for v in doc[name]]) for name in _VECTOR_FIELDS}
        return cls(**vals, L=float(doc["L"]), h=float(doc["h"]))

    @classmethod
    def from_json(cls, text: str) -> "Configuration":
        return cls.from_dict(json.loads(text))


_VECTOR_FIELDS = ("x0", "xt0", "xh", "xth", "x1", "xt1", "k0", "kt0", "kh", "kth")


class ConstraintReport(NamedTuple):
    slacks: tuple[float, ...]
    all_satisfied: bool


def expanding_configuration(L: float, h: float) -> Configuration:
    """Closed-form expanding configuration in the plane.

    ``x0 = 0``, ``x0~ = e1`` and

        k0  = [0, -3/h]
        k0~ = [-L/2, -3/h + L/2]
        kh  = [0, -3/h + L]
        kh~ = [L^3 h^2 / 64, -3/h + L - L^2 h / 8]
    """
    if not L > 0 or not h > 0:
        raise DomainError("need L > 0 and h > 0")
    return Configuration.from_slopes(
        [0.0, 0.0],
        [1.0, 0.0],
        [0.0, -3.0 / h],
        [-L / 2, -3.0 / h + L / 2],
        [0.0, -3.0 / h + L],
        [L**3 * h**2 / 64, -3.0 / h + L - L**2 * h / 8],
        L,
        h,
    )


def growth_formula(L: float, h: float) -> float:
    u = L * h
    return 1.0 + u**3 / 32 + u**4 / 64 + u**6 / 4096


def check_constraints(c: Configuration) -> ConstraintReport:
    """Slack ``-<dk, dx> - |dk|^2 / L`` of each of the six pairwise inequalities."""
    slacks = []
    for ka, kb, xa, xb in CONSTRAINT_PAIRS:
        dk = getattr(c, ka) - getattr(c, kb)
        dx = getattr(c, xa) - getattr(c, xb)
        slacks.append(float(-dk @ dx - dk @ dk / c.L))
    return ConstraintReport(tuple(slacks), all(s >= -FEASIBILITY_TOL for s in slacks))


def dilation(c: Configuration) -> float:
    """``|x1~ - x1|^2 / |x0~ - x0|^2``."""
    d0 = c.xt0 - c.x0
    den = float(d0 @ d0)
    if den == 0:
        raise DomainError("initial points coincide")
    d1 = c.xt1 - c.x1
    return float(d1 @ d1) / den


def transform(c: Configuration, *, scale: float = 1.0, rotation=None, shift=None) -> Configuration:
    """Apply ``x -> scale * R x + shift`` to points and ``k -> scale * R k`` to slopes."""
    R = np.eye(c.dim) if rotation is None else np.asarray(rotation, dtype=float)
    t = np.zeros(c.dim) if shift is None else np.asarray(shift, dtype=float)
    pts = {n: scale * R @ getattr(c, n) + t for n in ("x0", "xt0", "xh", "xth", "x1", "xt1")}
    slopes = {n: scale * R @ getattr(c, n) for n in ("k0", "kt0", "kh", "kth")}
    return Configuration(**pts, **slopes, L=c.L, h=c.h)


def bounded_rescaling(c: Configuration) -> Configuration:
    """Slopes multiplied by ``h`` and ``x0~ = x0 + h e1``: bounded gradients, same ratio."""
    h = c.h
    return Configuration.from_slopes(
        c.x0, c.x0 + h * (c.xt0 - c.x0), h * c.k0, h * c.kt0, h * c.kh, h * c.kth, c.L, h
    )


# ---------------------------------------------------------------------------
# numerical maximization
#
# With L scaled to one (u = L h) the unknowns are
#   a  = xh - x0                (k0 = 2 a / u)
#   D0 = k0~ - k0
#   p  = kh - k0
#   w  with kh~ - kh = S w,  S = diag(u^2, u, ..., u)
# which are all O(1) at the optimum.  The objective is (|x1~ - x1|^2 - 1) / u^3.


class _Problem:
    def __init__(self, u: float, d: int, subset: Sequence[int] = range(6)):
        self.u = u
        self.d = d
        self.subset = tuple(subset)
        n = 4 * d
        I = np.eye(d)
        Z = np.zeros((d, d))
        S = np.diag([u * u] + [u] * (d - 1))
        self.S = S
        e1 = np.zeros(d)
        e1[0] = 1.0

        def block(*mats):
            return np.hstack(mats)

        # selectors: a, D0, p, w
        A_a = block(I, Z, Z, Z)
        A_D = block(Z, I, Z, Z)
        A_p = block(Z, Z, I, Z)
        A_dh = block(Z, Z, Z, S)
        zero = np.zeros(d)
        # each constraint: v = V z, y = Y z + y0; c = (|v|^2 + <v, y>) / scale
        self.cons = [
            (A_D, np.zeros_like(A_D), e1, 1.0),
            (A_dh, 0.5 * u * A_D, e1, u * u),
            (A_p, A_a, zero, 1.0),
            (A_p + A_dh - A_D, A_a + 0.5 * u * A_D, zero, 1.0),
            (A_p + A_dh, A_a + 0.5 * u * A_D, e1, 1.0),
            (A_p - A_D, A_a, -e1, 1.0),
        ]
        self.A_dh = A_dh
        self.e1 = e1
        self.n = n

    def objective(self, z):
        dh = self.A_dh @ z
        # (|e1 + u dh|^2 - 1) / u^3
        u = self.u
        val = 2.0 * dh[0] / u**2 + (dh @ dh) / u
        grad = self.A_dh.T @ (2.0 * self.e1 / u**2 + 2.0 * dh / u)
        return val, grad

    def constraints(self, z):
        vals = []
        grads = []
        for i in self.subset:
            V, Y, y0, scale = self.cons[i]
            v = V @ z
            y = Y @ z + y0
            vals.append((v @ v + v @ y) / scale)
            grads.append((V.T @ (2 * v + y) + Y.T @ v) / scale)
        return np.array(vals), np.array(grads)

    def slopes(self, z, L: float, h: float):
        d = self.d
        a, D0, p, w = z[:d], z[d : 2 * d], z[2 * d : 3 * d], z[3 * d :]
        k0 = 2.0 * a / self.u
        kt0 = k0 + D0
        kh = k0 + p
        kth = kh + self.S @ w
        return tuple(L * v for v in (k0, kt0, kh, kth))

    def from_configuration(self, c: Configuration):
        L = c.L
        a = c.xh - c.x0
        D0 = (c.kt0 - c.k0) / L
        p = (c.kh - c.k0) / L
        w = np.linalg.solve(self.S, (c.kth - c.kh) / L)
        return np.concatenate([a, D0, p, w])


def _augmented_lagrangian(prob: _Problem, z0, *, outer: int = 40, rho0: float = 10.0, tol: float = 1e-12):
    """Maximize the objective subject to ``c_i(z) <= 0`` by the PHR method.

    Inner problems are solved with L-BFGS; the penalty doubles whenever the
    constraint violation fails to shrink by a factor four.
    """
    z = np.array(z0, dtype=float)
    m = len(prob.subset)
    mult = np.zeros(m)
    rho = rho0
    prev_viol = math.inf

    def merit(zz):
        f, gf = prob.objective(zz)
        c, gc = prob.constraints(zz)
        shifted = np.maximum(0.0, c + mult / rho)
        val = -f + 0.5 * rho * shifted @ shifted
        grad = -gf + rho * gc.T @ shifted
        return val, grad

    for _ in range(outer):
        res = minimize(merit, z, jac=True, method="L-BFGS-B",
                       options={"maxiter": 2000, "gtol": 1e-12, "ftol": 1e-15})
        z = res.x
        c, _ = prob.constraints(z)
        mult = np.maximum(0.0, mult + rho * c)
        viol = float(np.max(np.maximum(c, 0.0)))
        if viol < tol:
            break
        if viol > 0.25 * prev_viol:
            rho *= 2.0
        prev_viol = viol
    return z


def _polish(prob: _Problem, z):
    """Tighten feasibility and stationarity with SLSQP from the AL point."""
    res = minimize(
        lambda zz: tuple(-v for v in prob.objective(zz)),
        z,
        jac=True,
        method="SLSQP",
        constraints=[{
            "type": "ineq",
            "fun": lambda zz: -prob.constraints(zz)[0],
            "jac": lambda zz: -prob.constraints(zz)[1],
        }],
        options={"maxiter": 500, "ftol": 1e-16},
    )
    cand = res.x
    if np.max(prob.constraints(cand)[0]) <= max(1e-14, np.max(prob.constraints(z)[0])):
        return cand
    return z


def _max_violation(prob: _Problem, z) -> float:
    return float(np.max(np.maximum(prob.constraints(z)[0], 0.0)))


def _single_start(prob: _Problem, z0):
    z = _augmented_lagrangian(prob, z0)
    z = _polish(prob, z)
    return z, prob.objective(z)[0], _max_violation(prob, z)


def _threads() -> int:
    env = os.environ.get("RKCONTRACT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, min(8, os.cpu_count() or 1))


class SearchResult(NamedTuple):
    configuration: Configuration
    ratio: float
    excess: float  # ratio - 1, computed without cancellation
    max_violation: float
    starts: int
    objective_values: tuple[float, ...]


def maximize_dilation(
    L: float,
    h: float,
    d: int = 2,
    seed: int = 0,
    *,
    starts: int = 20,
    warm_start: Configuration | None = None,
    threads: int | None = None,
    feasibility_tol: float = 1e-10,
) -> SearchResult:
    """Multi-start search for the largest dilation allowed by the six constraints.

    ``x0 = 0`` and ``x0~ = e1`` are fixed.  Each start runs an augmented
    Lagrangian ascent followed by an SLSQP polish; the best feasible local
    optimum is returned (no global optimality claim).  Start ``i`` uses the
    generator ``default_rng([seed, i])`` so results do not depend on the
    thread count.
    """
    if d < 1:
        raise DomainError("dimension must be at least 1")
    if not L > 0 or not h > 0:
        raise DomainError("need L > 0 and h > 0")
    u = L * h
    prob = _Problem(u, d)
    inits = [np.random.default_rng([seed, i]).standard_normal(prob.n) for i in range(starts)]
    if warm_start is not None:
        if warm_start.dim != d:
            raise ShapeError("warm start has the wrong dimension")
        inits.insert(0, prob.from_configuration(warm_start))
    workers = threads or _threads()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda z0: _single_start(prob, z0), inits))
    else:
        results = [_single_start(prob, z0) for z0 in inits]
    values = tuple(float(v) for _, v, _ in results)
    best = None
    for idx, (z, val, viol) in enumerate(results):
        if viol > feasibility_tol:
            continue
        if best is None or val > results[best][1]:
            best = idx
    if best is None:
        best = int(np.argmin([viol for _, _, viol in results]))
    z, val, viol = results[best]
    x0 = np.zeros(d)
    xt0 = np.zeros(d)
    xt0[0] = 1.0
    config = Configuration.from_slopes(x0, xt0, *prob.slopes(z, L, h), L, h)
    excess = float(val) * u**3
    return SearchResult(config, 1.0 + excess, excess, viol, len(inits), values)


class CubicFit(NamedTuple):
    coefficient: float
    slope: float
    quotients: tuple[float, ...]
    steps: tuple[float, ...]
    ratios: tuple[float, ...]


def fit_cubic_coefficient(
    L: float = 1.0,
    d: int = 2,
    seed: int = 0,
    *,
    products: Sequence[float] = (0.01, 0.02, 0.05),
    starts: int = 20,
    threads: int | None = None,
) -> CubicFit:
    """Fit ``(max ratio - 1) / (L h)^3 = c + c' L h`` and report ``c``.

    ``products`` are the values of ``L h`` searched.
    """
    steps = tuple(p / L for p in products)
    quotients = []
    ratios = []
    for h in steps:
        res = maximize_dilation(L, h, d, seed, starts=starts, threads=threads)
        quotients.append(res.excess / (L * h) ** 3)
        ratios.append(res.ratio)
    x = np.asarray(products, dtype=float)
    if len(x) >= 2:
        slope, coef = np.polyfit(x, quotients, 1)
    else:
        slope, coef = 0.0, quotients[0]
    return CubicFit(float(coef), float(slope), tuple(quotients), steps, tuple(ratios))


class ReducedSolution(NamedTuple):
    delta0: np.ndarray
    delta_h: np.ndarray
    value: float  # |delta_1|^2
    slacks: tuple[float, float]
    leading_delta0: np.ndarray
    leading_delta_h: np.ndarray


def reduced_maximization(L: float, h: float, *, starts: int = 10, seed: int = 0) -> ReducedSolution:
    """Maximize ``|e1 + h Dh|^2`` under the two difference constraints only.

    Only ``(1/L)|D0|^2 <= -<D0, e1>`` and ``(1/L)|Dh|^2 <= -<Dh, e1 + h/2 D0>``
    are imposed.  Of the two mirror-image optima the one with
    ``D0[1] > 0`` is returned, alongside the leading-order forms
    ``D0 = [-L/2, L/2]`` and ``Dh = [L^3 h^2 / 64, -L^2 h / 8]``.
    """
    if not L > 0 or not h > 0:
        raise DomainError("need L > 0 and h > 0")
    if L * h > 1:
        raise DomainError("leading-order comparison requires L h <= 1")
    u = L * h
    prob = _Problem(u, 2, subset=(0, 1))
    best = None
    for i in range(starts):
        z0 = np.random.default_rng([seed, i]).standard_normal(prob.n)
        z, val, viol = _single_start(prob, z0)
        if viol <= 1e-10 and (best is None or val > best[1]):
            best = (z, val)
    if best is None:
        raise DomainError("no feasible point found")
    z = best[0]
    D0 = z[2:4].copy()
    Dh = prob.S @ z[6:8]
    if D0[1] < 0:
        D0[1] = -D0[1]
        Dh[1] = -Dh[1]
    delta0 = L * D0
    delta_h = L * Dh
    d1 = np.array([1.0, 0.0]) + h * delta_h
    dh = np.array([1.0, 0.0]) + 0.5 * h * delta0
    s1 = float(-delta0 @ np.array([1.0, 0.0]) - delta0 @ delta0 / L)
    s2 = float(-delta_h @ dh - delta_h @ delta_h / L)
    return ReducedSolution(
        delta0,
        delta_h,
        float(d1 @ d1),
        (s1, s2),
        np.array([-L / 2, L / 2]),
        np.array([L**3 * h**2 / 64, -(L**2) * h / 8]),
    )


def figure_data(c: Configuration, arrow_scale: float = 0.8) -> list[dict]:
    """Points and slope arrows (drawn from their evaluation points, scaled)."""
    rows = []
    for name in ("x0", "xt0", "xh", "xth", "x1", "xt1"):
        p = getattr(c, name)
        rows.append({"kind": "point", "name": name, "x": float(p[0]), "y": float(p[1]), "dx": 0.0, "dy": 0.0})
    for name, base in (("k0", "x0"), ("kt0", "xt0"), ("kh", "xh"), ("kth", "xth")):
        p = getattr(c, base)
        k = arrow_scale * getattr(c, name)
        rows.append({"kind": "arrow", "name": name, "x": float(p[0]), "y": float(p[1]),
                     "dx": float(k[0]), "dy": float(k[1])})
    return rows


def figure_svg(c: Configuration, arrow_scale: float = 0.8, size: int = 400) -> str:
    rows = figure_data(c, arrow_scale)
    xs = [r["x"] for r in rows] + [r["x"] + r["dx"] for r in rows]
    ys = [r["y"] for r in rows] + [r["y"] + r["dy"] for r in rows]
    pad = 0.5
    xmin, xmax, ymin, ymax = min(xs) - pad, max(xs) + pad, min(ys) - pad, max(ys) + pad
    scale = size / max(xmax - xmin, ymax - ymin)

    def tx(x, y):
        return (x - xmin) * scale, (ymax - y) * scale

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        '<defs><marker id="tip" markerWidth="8" markerHeight="8" refX="6" refY="3" orient="auto">'
        '<path d="M0,0 L6,3 L0,6 z" fill="blue"/></marker></defs>',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    for r in rows:
        x, y = tx(r["x"], r["y"])
        if r["kind"] == "point":
            parts.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="3" fill="black"/>')
            parts.append(f'<text x="{x + 4:.3f}" y="{y - 4:.3f}" font-size="11">{r["name"]}</text>')
        else:
            x1, y1 = tx(r["x"] + r["dx"], r["y"] + r["dy"])
            parts.append(
                f'<line x1="{x:.3f}" y1="{y:.3f}" x2="{x1:.3f}" y2="{y1:.3f}" stroke="blue" '
                f'marker-end="url(#tip)"><title>{r["name"]}</title></line>'
            )
    parts.append("</svg>")
    return "\n".join(parts)
