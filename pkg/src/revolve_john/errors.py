"""Exception hierarchy shared by every module."""


class RevolveError(Exception):
    """Base class for all errors raised by revolve_john."""


class DimensionError(RevolveError, ValueError):
    """Mismatched or unsupported dimensions."""


class PreconditionError(RevolveError, ValueError):
    """Input violates a documented precondition."""


class EmptySetError(RevolveError):
    """A polytope, section or contact set turned out to be empty."""


class UnboundedError(RevolveError):
    """A polytope that has to be bounded is not."""


class InfeasibleError(RevolveError):
    """An optimization problem has no strictly feasible point."""


class NonConvergenceError(RevolveError):
    """Iteration limit reached. ``best`` holds the last iterate."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class NoContactError(RevolveError):
    """No contact pairs at the requested tolerance."""


class CertificateNotFound(RevolveError):
    """No nonnegative weights reproduce the optimality equations at tolerance."""

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate
