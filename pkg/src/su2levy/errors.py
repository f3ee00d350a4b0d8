"""Exception types raised across the package."""


class SU2LevyError(Exception):
    """Base class for all package errors."""


class NonDominantWeight(SU2LevyError, ValueError):
    pass


class NonIntegerDimension(SU2LevyError, ValueError):
    pass


class SingularTorusPoint(SU2LevyError, ValueError):
    pass


class InvalidRootDatum(SU2LevyError, ValueError):
    pass


class InvalidSpec(SU2LevyError, ValueError):
    """Malformed generator data (bad diffusion matrix, weights, atoms)."""


class NotPSD(InvalidSpec):
    pass


class HypothesisHViolated(SU2LevyError):
    """The diffusion directions do not generate the whole Lie algebra."""


class NotConjugateInvariant(SU2LevyError):
    pass


class InconsistencyDetected(SU2LevyError):
    """Structural and numerical invariance tests disagree."""


class NotStable(SU2LevyError, ValueError):
    pass


class SmallTimeUnresolved(SU2LevyError):
    """The Fourier series cannot be truncated reliably at this small time."""


class EmptyLevyMeasure(SU2LevyError, ValueError):
    pass


class TimeMismatch(SU2LevyError, ValueError):
    pass
