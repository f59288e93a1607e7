"""Exception hierarchy for ladderchain."""


class LadderChainError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(LadderChainError, ValueError):
    """Raised for out-of-domain chain parameters, barriers or options."""


class StreamExhaustedError(LadderChainError, ValueError):
    """Raised when a sign stream is shorter than the requested horizon."""


class ConsistencyError(LadderChainError, RuntimeError):
    """An internal cross-check failed (singular system, bound violation,
    closed form not satisfying its defining rows, ...)."""


class ConvergenceError(LadderChainError, RuntimeError):
    """An iterative solver hit its iteration cap before converging."""
