"""Exception types shared across the package."""


class UsageError(ValueError):
    """Bad arguments: wrong dimensions, out-of-range indices or parameters."""


class InfeasibleSetError(ValueError):
    """A convex set (or a shrunk version of it) is empty."""


class EmptyShrunkSetError(InfeasibleSetError):
    def __init__(self, r, inradius):
        self.r = r
        self.inradius = inradius
        super().__init__(
            f"shrinking by r={r!r} empties the set (inradius={inradius!r})"
        )


class DomainError(ValueError):
    """A point lies outside the set an operation is defined on."""


class NotMonotoneError(ValueError):
    """The symmetric part of an affine game mapping is not positive semidefinite."""


class NoSolutionError(ValueError):
    """An affine system has no solution."""


class ScheduleValidationError(ValueError):
    """Step-size exponents violate the convergence conditions."""

    def __init__(self, report):
        self.report = report
        super().__init__(report.failure_message())


class PoisonedStateError(RuntimeError):
    """A non-finite payoff reached the learner; the run cannot continue."""


class NumericalDivergenceError(RuntimeError):
    """An iteration overflowed. ``trace`` holds the rows logged so far."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
