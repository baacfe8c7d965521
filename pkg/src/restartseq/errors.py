"""Exception types shared across the package."""


class RestartSeqError(Exception):
    """Base class for all package errors."""


class DistributionError(RestartSeqError, ValueError):
    """Invalid distribution parameters or probability table."""


class InfiniteMeanError(RestartSeqError):
    """The operation needs E[U] < inf but the distribution has infinite mean."""


class PreemptiveRestartError(RestartSeqError):
    """Restart fires before completion with probability one (p_r = 1)."""

    def __init__(self, message: str, p_restart: float = 1.0):
        super().__init__(message)
        self.p_restart = p_restart


class DegenerateRestartError(RestartSeqError, ValueError):
    """A restart time that is identically zero; E[T] would be 0/0."""


class NotApplicableError(RestartSeqError):
    """Preconditions of a diagnostic or threshold do not hold."""


# the perturbation thresholds use this name
InapplicableError = NotApplicableError


class NotADistributionError(RestartSeqError):
    """A reconstructed CMF is out of range or decreasing."""


class InconsistentTailError(RestartSeqError):
    """A reconstructed distribution does not reproduce the requested mean."""


class RestartCapExceeded(RestartSeqError):
    """A simulated replicate restarted more times than the configured cap."""
