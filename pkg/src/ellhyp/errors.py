"""Exception hierarchy shared by every module."""


class EllHypError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(EllHypError, ValueError):
    pass


class PoleProximityError(EllHypError, ArithmeticError):
    """An argument sits within the guard distance of a pole."""


class InvalidRegimeError(EllHypError, ValueError):
    """Bases or periods fall outside the region where a representation converges."""


class IntegrandFailureError(EllHypError, ArithmeticError):
    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class InadmissibleError(EllHypError, ValueError):
    """Parameters violate a balancing, pole-margin or shifted-point constraint."""


class DegenerateError(EllHypError, ArithmeticError):
    """A coefficient denominator vanishes, or the identity collapses to 0 = 0."""


class SolverFailureError(EllHypError, RuntimeError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class SamplingFailureError(EllHypError, RuntimeError):
    pass


class UsageError(EllHypError):
    pass
