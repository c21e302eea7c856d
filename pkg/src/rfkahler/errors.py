"""Exception hierarchy shared by all modules."""


class RFKError(Exception):
    """Base class for every error raised by rfkahler."""


class DomainError(RFKError, ValueError):
    """An argument lies outside the domain of the operation (x <= 0, bad n, ...)."""


class ParameterError(RFKError, ValueError):
    """Metric-family parameters (C, C1, cZ) are not admissible for the space."""


class UnsupportedModelError(RFKError):
    """No explicit matrix model exists for the requested space (Cayley plane)."""


class OracleUnavailableError(UnsupportedModelError):
    """A structural (Lie-bracket) check was requested for a space without a model."""


class ModelConstructionError(RFKError):
    """A built matrix model failed one of its structural invariants."""


class SingularExtensionError(RFKError):
    """The extension of the Kaehler form over the zero section does not exist."""


class NumericError(RFKError, ArithmeticError):
    """A numerical routine (quadrature, ODE solve, radicand) broke down."""
