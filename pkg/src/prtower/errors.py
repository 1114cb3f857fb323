"""Exception hierarchy shared by every module."""


class PrtowerError(Exception):
    """Base class for all library errors."""


class DomainError(PrtowerError, ValueError):
    """An input violates a mathematical precondition."""


class NotInvertible(PrtowerError, ArithmeticError):
    pass


class PrecisionExhausted(PrtowerError, ArithmeticError):
    """The requested answer is below the resolution of the working precision."""


class LevelMismatch(PrtowerError, ValueError):
    pass


class DivergenceDetected(PrtowerError, ArithmeticError):
    """An iteration failed to settle within its cap."""


class CapExceeded(PrtowerError, ArithmeticError):
    pass


class NotPsiZero(PrtowerError, ValueError):
    pass
