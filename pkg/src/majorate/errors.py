"""Exception hierarchy shared across the package.

Validation errors (bad inputs) and cap errors (resource limits) are kept
distinct so the service and CLI can map them to different exit codes.
"""


class MajorateError(Exception):
    """Base class for all package errors."""


class ValidationFailure(MajorateError):
    """Input violates a precondition; maps to exit code 2."""


class CapExceeded(MajorateError):
    """A configurable computational cap was exceeded; maps to exit code 3."""


class NegativeEntry(ValidationFailure):
    pass


class NotNormalised(ValidationFailure):
    pass


class DimensionMismatch(ValidationFailure):
    pass


class IrrationalWeights(ValidationFailure):
    pass


class SupportViolation(ValidationFailure):
    pass


class DegenerateTarget(ValidationFailure):
    pass


class MetricUnsupported(ValidationFailure):
    pass


class ConverseInfidelityUnsupported(MetricUnsupported):
    pass


class RankOutOfRange(ValidationFailure):
    pass


class UndefinedCase(ValidationFailure):
    pass


class OutOfExpansionRange(ValidationFailure):
    pass


class NoBracket(MajorateError):
    """Root bracketing failed after the allowed widening attempts."""


class ClassExplosion(CapExceeded):
    pass


class DimensionTooLarge(CapExceeded):
    pass


class InfeasibleAtZero(MajorateError):
    """Feasibility search failed at zero target copies; indicates a bug."""
