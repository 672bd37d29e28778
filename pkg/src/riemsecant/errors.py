class RiemSecantError(Exception):
    """Base class for all errors raised by this package."""


class InvalidPoint(RiemSecantError, ValueError):
    pass


class BasePointMismatch(RiemSecantError, ValueError):
    pass


class CutLocus(RiemSecantError):
    """The minimal geodesic between two points is not unique."""


class FieldEvaluation(RiemSecantError):
    pass


class DegeneratePair(RiemSecantError, ValueError):
    pass


class SingularOperator(RiemSecantError):
    """A divided-difference operator cannot be inverted reliably."""

    def __init__(self, message: str, condition: float = float("inf")):
        super().__init__(message)
        self.condition = condition


class InvalidConfig(RiemSecantError, ValueError):
    pass


class InsufficientData(RiemSecantError):
    pass


class Undefined(RiemSecantError, ValueError):
    """A certificate function was evaluated outside its admissible range."""


class IndexOutOfRange(RiemSecantError, IndexError):
    pass
