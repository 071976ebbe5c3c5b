"""Convex polygons clipped by half-planes.

Polygons are lists of ``(x, y)`` tuples in counter-clockwise order.  The
routines only use ``+ - * /`` and comparisons, so coordinates may be
floats or :class:`~fractions.Fraction` objects; with fractions every
result is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

Point = tuple  # (x, y)


@dataclass(frozen=True)
class HalfPlane:
    """The closed set ``{p : nx * p[0] + ny * p[1] <= c}``."""

    nx: object
    ny: object
    c: object

    def excess(self, p) -> object:
        return self.nx * p[0] + self.ny * p[1] - self.c

    def contains(self, p, tol=0) -> bool:
        return self.excess(p) <= tol


def square(center, half_width) -> list:
    """Axis-aligned square as a CCW vertex list."""
    cx, cy = center
    r = half_width
    return [(cx - r, cy - r), (cx + r, cy - r), (cx + r, cy + r), (cx - r, cy + r)]


def clip(poly: Sequence[Point], hp: HalfPlane, tol=0) -> list:
    """Sutherland-Hodgman clip of a convex polygon against one half-plane.

    Vertices within ``tol`` of the boundary line count as inside and are
    kept without introducing new intersection points.
    """
    if not poly:
        return []
    out = []
    n = len(poly)
    vals = [hp.excess(p) for p in poly]
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        vp, vq = vals[i], vals[(i + 1) % n]
        p_in = vp <= tol
        q_in = vq <= tol
        if p_in:
            out.append(p)
        # a vertex lying on the line is already emitted, no crossing point needed
        if p_in != q_in and abs(vp) > tol and abs(vq) > tol:
            s = vp / (vp - vq)
            out.append((p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])))
    return _dedupe(out)


def _dedupe(poly: list) -> list:
    out = []
    for p in poly:
        if not out or p != out[-1]:
            out.append(p)
    if len(out) > 1 and out[0] == out[-1]:
        out.pop()
    return out


def clip_all(poly: Sequence[Point], planes: Iterable[HalfPlane], tol=0) -> list:
    out = list(poly)
    for hp in planes:
        out = clip(out, hp, tol)
        if len(out) < 3:
            return []
    return out


def area(poly: Sequence[Point]):
    """Shoelace area (positive for CCW order)."""
    n = len(poly)
    if n < 3:
        return 0
    acc = 0
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        acc += x0 * y1 - x1 * y0
    return acc / 2


def area_and_centroid(poly: Sequence[Point]):
    """Signed area and centroid of a simple polygon.

    The centroid is ``None`` for degenerate (zero-area) polygons.
    """
    n = len(poly)
    if n < 3:
        return 0, None
    # shift to the first vertex to limit cancellation
    ox, oy = poly[0]
    a2 = 0
    cx = 0
    cy = 0
    for i in range(n):
        x0, y0 = poly[i][0] - ox, poly[i][1] - oy
        x1, y1 = poly[(i + 1) % n][0] - ox, poly[(i + 1) % n][1] - oy
        cross = x0 * y1 - x1 * y0
        a2 += cross
        cx += (x0 + x1) * cross
        cy += (y0 + y1) * cross
    if a2 == 0:
        return 0, None
    return a2 / 2, (ox + cx / (3 * a2), oy + cy / (3 * a2))


def line_segment_in_box(hp: HalfPlane, box, others: Sequence[HalfPlane] = (), tol=0.0):
    """Part of the line ``{excess == 0}`` inside ``box`` and all of ``others``.

    ``box`` is ``(xmin, xmax, ymin, ymax)``.  Returns a pair of endpoints or
    ``None``.  Float arithmetic only; used for plotting.
    """
    nx, ny, c = float(hp.nx), float(hp.ny), float(hp.c)
    norm2 = nx * nx + ny * ny
    if norm2 == 0:
        return None
    p0 = (nx * c / norm2, ny * c / norm2)
    d = (-ny, nx)
    lo, hi = -float("inf"), float("inf")
    xmin, xmax, ymin, ymax = box
    constraints = [
        HalfPlane(-1.0, 0.0, -xmin),
        HalfPlane(1.0, 0.0, xmax),
        HalfPlane(0.0, -1.0, -ymin),
        HalfPlane(0.0, 1.0, ymax),
        *others,
    ]
    for g in constraints:
        gx, gy, gc = float(g.nx), float(g.ny), float(g.c)
        slope = gx * d[0] + gy * d[1]
        base = gx * p0[0] + gy * p0[1] - gc
        if abs(slope) < 1e-15:
            if base > tol:
                return None
            continue
        bound = (-base + tol) / slope
        if slope > 0:
            hi = min(hi, bound)
        else:
            lo = max(lo, bound)
    if not lo < hi:
        return None
    return (
        (p0[0] + lo * d[0], p0[1] + lo * d[1]),
        (p0[0] + hi * d[0], p0[1] + hi * d[1]),
    )
