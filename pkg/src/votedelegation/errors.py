"""Exception types shared by the package."""


class VoteDelegationError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(VoteDelegationError, ValueError):
    """Invalid input: bad weights, probability out of range, etc."""


class CapacityError(VoteDelegationError):
    """The instance exceeds a configured computation cap.

    The message always names an alternative route (dynamic program,
    fast path or Monte Carlo) that may handle the instance.
    """


class UndefinedCorrelationError(ValidationError):
    """Correlation requested for constant or too-short input."""
