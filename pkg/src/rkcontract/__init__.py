"""Convex contractivity of Runge-Kutta methods on L-smooth gradient flows.

The package certifies step-size intervals on which an RK step is
non-expansive for every convex L-smooth potential, and builds an explicit
smooth convex potential on which Runge's two-stage midpoint method expands
distances for every step size.
"""

from rkcontract.core import (
    ButcherTableau,
    ContractivityMatrix,
    build_tableau,
    euler_chain_tableau,
    m_matrix,
    mbar_matrix,
)
from rkcontract.errors import (
    CalibrationError,
    ConsistencyError,
    ConstructionError,
    DomainError,
    PreconditionError,
    RKContractError,
    ShapeError,
    UnsupportedError,
    WitnessError,
)

__version__ = "0.1.0"

__all__ = [
    "ButcherTableau",
    "ContractivityMatrix",
    "build_tableau",
    "euler_chain_tableau",
    "m_matrix",
    "mbar_matrix",
    "CalibrationError",
    "ConsistencyError",
    "ConstructionError",
    "DomainError",
    "PreconditionError",
    "RKContractError",
    "ShapeError",
    "UnsupportedError",
    "WitnessError",
    "__version__",
]
