"""Exception types raised by the solver library."""


class NlhelmError(Exception):
    """Base class for all library errors."""


class QuadratureFailure(NlhelmError):
    def __init__(self, message, offset=None, estimate=None):
        super().__init__(message)
        self.offset = offset
        self.estimate = estimate


class NoRootFound(NlhelmError):
    pass


class DegenerateK(NlhelmError):
    pass


class NearSingularDispersion(NlhelmError):
    pass


class SingularSystem(NlhelmError):
    pass


class KernelOverflow(NlhelmError):
    """The continued kernel overflowed at stretched coordinates."""


class RegimeMismatch(UserWarning):
    pass


class OutOfDomain(NlhelmError):
    pass


class EmptyRegion(NlhelmError):
    pass


class ZeroReference(NlhelmError):
    pass


class EmptyFit(NlhelmError):
    pass


class UnderflowWindow(NlhelmError):
    pass
