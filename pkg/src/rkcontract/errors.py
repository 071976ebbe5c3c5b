"""Exception hierarchy."""


class RKContractError(Exception):
    """Base class for all package errors."""


class ConsistencyError(RKContractError, ValueError):
    """Tableau weights do not sum to one."""


class DomainError(RKContractError, ValueError):
    """Argument outside the admissible domain (nonpositive step, bad regime...)."""


class ShapeError(RKContractError, ValueError):
    """Array shapes or symmetry do not match what an operation needs."""


class PreconditionError(RKContractError, ValueError):
    """A documented precondition of an operation does not hold."""


class UnsupportedError(RKContractError, NotImplementedError):
    """Requested feature is outside what the implementation supports."""


class ConstructionError(RKContractError, RuntimeError):
    """A geometric construction could not be completed."""


class CalibrationError(RKContractError, RuntimeError):
    """Safety-factor calibration did not produce a verified L-smooth potential."""


class WitnessError(RKContractError, RuntimeError):
    """The non-contractivity witness did not show expansion."""
