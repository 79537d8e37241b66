"""Exception hierarchy.

Everything raised on purpose derives from :class:`FreqPoisonError`. The two
intermediate classes split failures by who has to fix them: a
:class:`ConfigError` means the requested configuration cannot work, a
:class:`DataError` means the inputs (files, arrays) are bad. The CLI maps them
to exit codes 2 and 3.
"""


class FreqPoisonError(Exception):
    pass


class ConfigError(FreqPoisonError, ValueError):
    pass


class DataError(FreqPoisonError, ValueError):
    pass


# image_io
class UnreadableFile(DataError):
    pass


class UnsupportedFormat(DataError):
    pass


class UnsupportedBitDepth(DataError):
    pass


class IoError(DataError):
    pass


class EmptyDataset(DataError):
    pass


class MixedDimensions(DataError):
    pass


# spectral / injector / metrics
class DimensionTooSmall(DataError):
    pass


class OddDimension(DataError):
    pass


class ShapeMismatch(DataError):
    pass


class NonFiniteInput(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class TooSmall(DataError):
    pass


class SpecOutOfBounds(DataError):
    pass


# layout / pipeline / ntk
class CapacityExceeded(ConfigError):
    pass


class TargetOutOfRange(ConfigError):
    pass


class SpacingViolation(ConfigError):
    pass


class PlanInfeasible(ConfigError):
    pass


class InvalidStage(ConfigError):
    pass


class NonPositiveGamma(ConfigError):
    pass
