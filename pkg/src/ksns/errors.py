"""Exception types raised by the solver and diagnostics layers."""


class KSNSError(Exception):
    """Base class for every error raised by this package."""


class DomainError(KSNSError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class UnderResolvedCutoff(DomainError):
    """A cutoff radius is too small to be represented on the grid."""


class SingularSignal(DomainError):
    """The sensitivity was evaluated at c <= 0 with s1 = 0."""


class InvalidInitialData(DomainError):
    """Initial cell density is identically zero or otherwise unusable."""


class InvalidConfig(KSNSError, ValueError):
    """Configuration failed validation; ``violations`` lists every problem."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class FitError(KSNSError, ValueError):
    """A decay-rate fit was requested on data it cannot handle."""


class TimeStepError(KSNSError):
    """The requested time step violates a CFL or positivity bound."""

    def __init__(self, message, dt=None, dt_allowed=None):
        super().__init__(message)
        self.dt = dt
        self.dt_allowed = dt_allowed


class SolverStall(KSNSError, RuntimeError):
    """A linear solve did not reach its tolerance within the iteration cap."""

    def __init__(self, message, residuals=()):
        super().__init__(message)
        self.residuals = list(residuals)


class RunAborted(KSNSError, RuntimeError):
    """A simulation stopped before ``t_end``; the cause is chained."""
