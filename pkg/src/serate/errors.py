"""Exception hierarchy.

Every error raised by the library derives from :class:`SerateError`, which
is itself a :class:`ValueError` so callers validating inputs can catch
either.
"""


class SerateError(ValueError):
    """Base class for all library errors."""


class DimensionMismatch(SerateError):
    pass


class NotHermitian(SerateError):
    pass


class IndefiniteInput(SerateError):
    pass


class NotPositiveDefinite(SerateError):
    pass


class SingularPrior(SerateError):
    pass


class NumericalFailure(SerateError):
    pass


class NegativeBudget(SerateError):
    pass


class AllModesDisabled(SerateError):
    pass


class DistortionOutOfRange(SerateError):
    pass


class InsufficientRows(SerateError):
    pass


class ZeroChannel(SerateError):
    pass


class JacobianFailure(SerateError):
    pass


class ZeroEnergy(SerateError):
    pass


class NonPositiveInput(SerateError):
    pass


class DelayOutOfRange(SerateError):
    pass


class SingularGram(SerateError):
    pass


class InvariantViolation(SerateError):
    """A computed result breaks an ordering the theory guarantees."""


class ConfigInvalid(SerateError):
    pass
