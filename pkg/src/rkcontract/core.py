"""Butcher tableaux and the algebraic-stability matrices built from them.

For an ``s``-stage scheme with coefficients ``a`` and weights ``b`` the
symmetric matrix

    m_ij = b_i a_ij + b_j a_ji - b_i b_j

controls how one step changes the distance between two numerical
trajectories.  Adding the dissipation supplied by cocoercivity of an
L-smooth convex gradient gives

    mbar_ij(h) = (2 h b_i / L) delta_ij + h^2 m_ij,

whose positive semidefiniteness certifies a non-expansive step.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from rkcontract.errors import ConsistencyError, DomainError, ShapeError

CONSISTENCY_TOL = 1e-12


def _frozen(x) -> np.ndarray:
    arr = np.array(x, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class ButcherTableau:
    """Coefficients of an ``s``-stage Runge-Kutta method.

    Instances are immutable; build them with :func:`build_tableau` so that
    shape and consistency are validated.
    """

    a: np.ndarray
    b: np.ndarray
    name: str = ""

    @property
    def s(self) -> int:
        return len(self.b)

    @property
    def explicit(self) -> bool:
        return bool(np.all(np.triu(self.a) == 0.0))

    @property
    def consistent(self) -> bool:
        return abs(float(np.sum(self.b)) - 1.0) <= CONSISTENCY_TOL

    @property
    def c(self) -> np.ndarray:
        """Abscissae ``c_i = sum_j a_ij``."""
        return self.a.sum(axis=1)

    def to_dict(self) -> dict:
        return {"a": self.a.tolist(), "b": self.b.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def __eq__(self, other):
        if not isinstance(other, ButcherTableau):
            return NotImplemented
        return np.array_equal(self.a, other.a) and np.array_equal(self.b, other.b)

    def __hash__(self):
        return hash((self.a.tobytes(), self.b.tobytes()))


@dataclass(frozen=True)
class ContractivityMatrix:
    """The matrix ``mbar(h)`` for a given tableau, step ``h`` and Lipschitz ``L``."""

    entries: np.ndarray
    h: float
    L: float

    @property
    def s(self) -> int:
        return self.entries.shape[0]


def _parse_coefficient(value) -> float:
    # "1/3", "0.125" and plain JSON numbers are all accepted
    if isinstance(value, str):
        try:
            return float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError) as exc:
            raise ShapeError(f"cannot parse coefficient {value!r}") from exc
    if isinstance(value, bool) or not isinstance(value, (int, float, Fraction)):
        raise ShapeError(f"coefficient must be a number or string, got {value!r}")
    return float(value)


def build_tableau(a, b, name: str = "") -> ButcherTableau:
    """Validate ``a`` and ``b`` and return a :class:`ButcherTableau`.

    Entries may be numbers, :class:`~fractions.Fraction` objects or strings
    such as ``"1/3"``.  Implicit tableaux are accepted; check
    :attr:`ButcherTableau.explicit` where explicitness matters.

    Raises
    ------
    ShapeError
        If ``a`` is not square or ``b`` does not have matching length.
    ConsistencyError
        If ``|sum(b) - 1| > 1e-12``.
    """
    try:
        a_rows = [[_parse_coefficient(v) for v in row] for row in a]
        b_vals = [_parse_coefficient(v) for v in b]
    except TypeError as exc:
        raise ShapeError("a must be a matrix and b a vector") from exc
    s = len(b_vals)
    if s == 0:
        raise ShapeError("tableau needs at least one stage")
    if len(a_rows) != s or any(len(row) != s for row in a_rows):
        raise ShapeError(f"a must be {s}x{s} to match len(b) = {s}")
    b_arr = np.array(b_vals)
    if not np.all(np.isfinite(b_arr)) or not np.all(np.isfinite(a_rows)):
        raise ShapeError("tableau coefficients must be finite")
    total = float(np.sum(b_arr))
    if abs(total - 1.0) > CONSISTENCY_TOL:
        raise ConsistencyError(f"weights sum to {total!r}, expected 1")
    return ButcherTableau(a=_frozen(a_rows), b=_frozen(b_arr), name=name)


def euler_tableau() -> ButcherTableau:
    return build_tableau([[0]], [1], name="euler")


def runge_tableau() -> ButcherTableau:
    """Runge's explicit midpoint method ``y1 = y0 + h F(y0 + h/2 F(y0))``."""
    return build_tableau([[0, 0], ["1/2", 0]], [0, 1], name="runge")


def two_stage_first_order_tableau() -> ButcherTableau:
    """Two half-length Euler substeps (``b = [1/2, 1/2]``, ``a21 = 1/2``)."""
    return build_tableau([[0, 0], ["1/2", 0]], ["1/2", "1/2"], name="euler2")


def heun_tableau() -> ButcherTableau:
    return build_tableau([[0, 0], [1, 0]], ["1/2", "1/2"], name="heun")


def rk4_tableau() -> ButcherTableau:
    return build_tableau(
        [[0, 0, 0, 0], ["1/2", 0, 0, 0], [0, "1/2", 0, 0], [0, 0, 1, 0]],
        ["1/6", "1/3", "1/3", "1/6"],
        name="rk4",
    )


def backward_euler_tableau() -> ButcherTableau:
    return build_tableau([[1]], [1], name="backward-euler")


def implicit_midpoint_tableau() -> ButcherTableau:
    return build_tableau([["1/2"]], [1], name="implicit-midpoint")


NAMED_TABLEAUX = {
    "euler": euler_tableau,
    "runge": runge_tableau,
    "euler2": two_stage_first_order_tableau,
    "heun": heun_tableau,
    "rk4": rk4_tableau,
    "backward-euler": backward_euler_tableau,
    "implicit-midpoint": implicit_midpoint_tableau,
}


def euler_chain_tableau(b: Sequence) -> ButcherTableau:
    """Tableau with ``a_ij = b_j`` for ``i > j``.

    One step equals ``s`` consecutive Euler substeps of lengths
    ``b_1 h, ..., b_s h``.
    """
    weights = np.array([_parse_coefficient(v) for v in b])
    if np.any(weights < 0):
        raise DomainError("euler chain weights must be nonnegative")
    s = len(weights)
    a = np.tril(np.tile(weights, (s, 1)), k=-1)
    return build_tableau(a.tolist(), weights.tolist(), name="euler-chain")


def m_matrix(t: ButcherTableau) -> np.ndarray:
    """Algebraic-stability matrix ``m_ij = b_i a_ij + b_j a_ji - b_i b_j``."""
    ba = t.b[:, None] * t.a
    # B + B.T is bitwise symmetric because float addition commutes
    return ba + ba.T - np.outer(t.b, t.b)


def mbar_matrix(t: ButcherTableau, h: float, L: float) -> ContractivityMatrix:
    """``(2 h b_i / L) delta_ij + h^2 m_ij`` as a :class:`ContractivityMatrix`."""
    if not h > 0:
        raise DomainError(f"step size must be positive, got {h}")
    if not L > 0:
        raise DomainError(f"Lipschitz constant must be positive, got {L}")
    entries = np.diag(2.0 * h * t.b / L) + h * h * m_matrix(t)
    entries.flags.writeable = False
    return ContractivityMatrix(entries=entries, h=float(h), L=float(L))


def tableau_from_dict(doc: dict, name: str = "") -> ButcherTableau:
    if not isinstance(doc, dict) or "a" not in doc or "b" not in doc:
        raise ShapeError('tableau document needs keys "a" and "b"')
    return build_tableau(doc["a"], doc["b"], name=name or doc.get("name", ""))


def load_tableau(source: str | Path) -> ButcherTableau:
    """Read ``{"a": [[...]], "b": [...]}`` from a path, or a builtin name."""
    if str(source) in NAMED_TABLEAUX and not Path(source).exists():
        return NAMED_TABLEAUX[str(source)]()
    text = Path(source).read_text()
    return tableau_from_dict(json.loads(text), name=Path(source).stem)
