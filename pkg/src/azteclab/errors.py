"""Exception hierarchy shared by all azteclab modules."""


class AztecError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(AztecError, ValueError):
    """Invalid model description or operation inputs."""


class LengthMismatch(ValidationError):
    pass


class NonPositiveWeight(ValidationError):
    pass


class NotStandardModel(ValidationError):
    """Asymptotic operation requested for a weighting that is not 2xk-standard."""


class PeriodicityViolation(ValidationError):
    pass


class OddN(ValidationError):
    pass


class PoleAtZ(ValidationError):
    """Symbol evaluated at one of its poles (z=0, or z=1 for an even half-step)."""


class NumericalFailure(AztecError, ArithmeticError):
    """A numerical invariant failed badly enough that results cannot be trusted."""


class RootImagTooLarge(NumericalFailure):
    pass


class OrderingViolation(NumericalFailure):
    pass


class DegenerateSpectrum(NumericalFailure):
    pass


class DivisionResidual(NumericalFailure):
    pass


class ZeroDenominator(ValidationError):
    pass


class DegreeCollapse(NumericalFailure):
    pass


class UnclassifiablePoint(NumericalFailure):
    pass


class NotRough(ValidationError):
    pass


class NotSmooth(ValidationError):
    pass


class UnsupportedRegion(ValidationError):
    pass


class NeighborhoodLeavesRough(ValidationError):
    pass


class NoSmoothRegion(ValidationError):
    pass


class NoConvergence(NumericalFailure):
    """Quadrature failed to reach the requested tolerance within the node cap."""


class IndexOutOfRange(ValidationError):
    pass


class NonIntegerWinding(NumericalFailure):
    pass


class DerivativeSingularity(NumericalFailure):
    pass


class MalformedTiling(ValidationError):
    pass


class TooLarge(ValidationError):
    pass


class OutOfRange(ValidationError):
    pass


class EmptyQuery(ValidationError):
    pass
