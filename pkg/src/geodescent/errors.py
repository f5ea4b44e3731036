"""Exception hierarchy shared across the library."""


class GeodescentError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(GeodescentError):
    """Operands live in different-dimensional spaces."""


class NonFiniteInput(GeodescentError):
    """A vector or scalar argument contains nan or inf."""


class NegativeRadius(GeodescentError):
    """A computed squared radius is negative beyond the roundoff clamp."""


class DisjointBalls(GeodescentError):
    """Two balls that were required to intersect do not."""


class SamplingStalled(GeodescentError):
    """Rejection sampling acceptance rate fell below 1e-6."""


class PreconditionViolated(GeodescentError):
    """A documented operation precondition does not hold."""


class ZeroDirection(GeodescentError):
    """Line search requested along the zero direction."""


class NonConvexDetected(GeodescentError):
    """Observed derivative pattern along a line is inconsistent with convexity."""


class NotPositiveDefinite(GeodescentError):
    """Quadratic form matrix is not positive definite."""


class EmptyDataset(GeodescentError):
    """Dataset has no samples."""


class NonPositiveLambda(GeodescentError):
    """Regularization coefficient must be > 0."""


class InvalidDimension(GeodescentError):
    """Problem dimension outside the supported range."""


class InvalidParameter(GeodescentError):
    """Scalar parameter outside its documented range."""


class ParseError(GeodescentError):
    """Base class for dataset parsing failures."""


class MalformedLine(ParseError):
    """A line of LIBSVM text could not be parsed."""

    def __init__(self, line_no, message):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class TooManyClasses(ParseError):
    """More than two distinct raw label values."""


class AmbiguousLabels(ParseError):
    """A single raw label value with no defined mapping to +/-1."""


class EmptyInput(ParseError):
    """No data lines in the input."""


class AlphaTooLarge(GeodescentError):
    """Supplied strong-convexity modulus exceeds the true one (localization balls became disjoint)."""


class RateViolation(GeodescentError):
    """Per-step radius shrink guarantee failed; indicates an implementation bug."""


class BadReference(GeodescentError):
    """Reference optimal value exceeds the best value in a trace."""


class EmptyResults(GeodescentError):
    """Aggregation over an empty result set."""


class ConfigError(GeodescentError):
    """Invalid benchmark configuration."""
