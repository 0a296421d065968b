"""Exception hierarchy. ``exit_code`` is what the CLI returns for each family."""


class OctSegError(Exception):
    exit_code = 3


class DataError(OctSegError):
    """Input data violates an operation's preconditions."""

    exit_code = 3


class NumericError(OctSegError):
    """A numerical routine diverged or produced non-finite values."""

    exit_code = 4


class ConfigError(OctSegError):
    exit_code = 2


# raster
class MissingFile(DataError, FileNotFoundError):
    pass


class MalformedHeader(DataError):
    pass


class UnsupportedMaxval(DataError):
    pass


class TruncatedPayload(DataError):
    pass


class Unwritable(DataError):
    pass


class InvalidRaster(DataError):
    pass


class MarginTooLarge(DataError):
    pass


# noise
class ImageTooSmall(DataError):
    pass


class InvalidThresholds(DataError):
    pass


class EvenWindow(DataError):
    pass


# guidewire
class BandTooWide(DataError):
    pass


class InvalidBand(DataError):
    pass


# transform
class DimensionMismatch(DataError):
    pass


class NonSquareInput(DataError):
    pass


# segmentation
class DegenerateHistogram(DataError):
    pass


class TooFewIntensities(DataError):
    pass


class LengthMismatch(DataError):
    pass


# features
class InvalidPatch(DataError):
    pass


class EmptyClass(DataError):
    pass


class EmptyDataset(DataError):
    pass


class UnknownFeature(DataError):
    pass


# models
class SingleClass(DataError):
    pass


class InvalidHyperparameter(DataError):
    pass


class WidthMismatch(DataError):
    pass


class InvalidSpec(DataError):
    pass
