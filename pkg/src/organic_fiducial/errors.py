"""Exception hierarchy shared by all modules."""


class FiducialError(Exception):
    """Base class for every error raised by this package."""


class DomainError(FiducialError, ValueError):
    """An argument lies outside the domain of the function."""


class SolverFailure(FiducialError, ArithmeticError):
    """A numerical solver could not produce a result."""


class NonBracketing(SolverFailure):
    """The root-finding target is not bracketed by the interval."""


class MaxIterExceeded(SolverFailure):
    """The iteration budget ran out before the tolerance was reached."""


class NonFinite(SolverFailure):
    """An integrand or objective produced inf or nan at an interior node."""


class NormalizerUnderflow(SolverFailure):
    """The unnormalized slice mass is zero in double precision."""


class EmptySupport(FiducialError, ValueError):
    """A post-data support restriction carries no primary-variable mass."""


class ConditionViolated(FiducialError):
    """A prerequisite of the two-stage construction does not hold."""


class EmptySample(FiducialError, ValueError):
    """An analysis routine received no draws."""


class DrawFailure(SolverFailure):
    """A single fiducial draw failed; carries the draw index and gamma."""

    def __init__(self, message, index, gamma):
        super().__init__(f"{message} (draw {index}, gamma={gamma!r})")
        self.index = index
        self.gamma = gamma


# status codes returned by the jitted kernels
STATUS_OK = 0
STATUS_NON_BRACKETING = 1
STATUS_MAX_ITER = 2
STATUS_NON_FINITE = 3
STATUS_UNDERFLOW = 4

_STATUS_ERRORS = {
    STATUS_NON_BRACKETING: (NonBracketing, "target not bracketed"),
    STATUS_MAX_ITER: (MaxIterExceeded, "iteration budget exhausted"),
    STATUS_NON_FINITE: (NonFinite, "non-finite value encountered"),
    STATUS_UNDERFLOW: (NormalizerUnderflow, "slice mass underflows"),
}


def raise_for_status(status, context=""):
    if status == STATUS_OK:
        return
    cls, text = _STATUS_ERRORS.get(int(status), (SolverFailure, "unknown failure"))
    raise cls(f"{context}: {text}" if context else text)
