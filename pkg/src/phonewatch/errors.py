"""Exception hierarchy shared by the pipeline stages."""


class PhoneWatchError(Exception):
    """Base class for all errors raised by phonewatch."""


class InvalidInputError(PhoneWatchError, ValueError):
    """Malformed or out-of-range input (bad rectangles, mismatched sizes, ...)."""


class EmptyMaskError(PhoneWatchError, ValueError):
    """A moment that needs at least one foreground pixel got an empty mask."""


class KernelDomainError(PhoneWatchError, ArithmeticError):
    """Kernel evaluation produced a non-finite value."""


class InfeasibleError(PhoneWatchError):
    """The requested nu cannot be satisfied for the class balance."""


class ConvergenceError(PhoneWatchError):
    """The SVM solver hit its iteration cap before meeting the KKT tolerance."""

    def __init__(self, message, violation=float("nan")):
        super().__init__(message)
        self.violation = violation


class DegenerateModelError(PhoneWatchError):
    """Training produced no usable support vectors or a non-positive margin."""
