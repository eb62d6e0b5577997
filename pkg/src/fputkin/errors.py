"""Exception hierarchy shared by every module.

Each error kind maps to one failure class so that the command line front end
can translate it into an exit status.
"""


class FputKinError(Exception):
    """Base class for all toolkit errors."""


class InvalidParameter(FputKinError, ValueError):
    """A parameter or input violates a documented precondition."""


class IntegrationDiverged(FputKinError, ArithmeticError):
    """Time stepping produced non-finite or runaway values."""

    def __init__(self, message: str, last_good_time: float):
        super().__init__(f"{message} (last good time {last_good_time:.17g})")
        self.last_good_time = last_good_time


class FixedPointFailed(FputKinError, ArithmeticError):
    """A fixed-point iteration did not reach its tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class QuadratureFailed(FputKinError, ArithmeticError):
    """A quadrature or root-finding stage could not meet its target."""


class PositivityLost(FputKinError, ArithmeticError):
    """The kinetic solution became non-positive."""

    def __init__(self, message: str, time: float):
        super().__init__(f"{message} at t={time:.17g}")
        self.time = time


class NotAdmissible(FputKinError, ValueError):
    """A structural transform was requested on an object that does not allow it."""


class StructuralError(FputKinError, AssertionError):
    """An internal consistency check on a diagram failed."""


class SerializationError(FputKinError, ValueError):
    """Results could not be serialized faithfully (for example NaN values)."""
