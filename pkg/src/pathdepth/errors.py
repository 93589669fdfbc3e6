"""Exception and warning types shared across the package."""


class PathDepthError(Exception):
    """Base class for all package-specific errors."""


# raster --------------------------------------------------------------------

class RasterFormatError(PathDepthError, ValueError):
    """Raster source does not conform to a documented grid format."""


class MalformedHeader(RasterFormatError):
    """Grid header is missing, duplicated, unknown or non-numeric."""


class BodyShapeMismatch(RasterFormatError):
    """Grid body cell count disagrees with the declared ncols * nrows."""


class NonFiniteCell(RasterFormatError):
    """Grid body contains a NaN or infinite cell value."""


class GeometryMismatch(PathDepthError, ValueError):
    """DTM/DSM pair whose grid geometries differ."""


# profile -------------------------------------------------------------------

class EndpointOutOfBounds(PathDepthError, ValueError):
    """A link endpoint lies outside the grid extent."""


class EndpointOnNodata(PathDepthError, ValueError):
    """A link endpoint falls on a nodata terrain cell."""


class StepNonPositive(PathDepthError, ValueError):
    """Requested profile sampling step is zero or negative."""


class EmptyProfile(PathDepthError, ValueError):
    """Depth computation requires at least one profile sample."""


# dataset -------------------------------------------------------------------

class SchemaMismatch(PathDepthError, ValueError):
    """CSV header or row layout differs from the documented schema."""


class EmptyInput(PathDepthError, ValueError):
    """Input stream contains no header line at all."""


class MissingCityGrids(PathDepthError, ValueError):
    """A measurement references a city with no loaded grid pair."""


# models --------------------------------------------------------------------

class NonPositiveInput(PathDepthError, ValueError):
    """Distance or frequency must be strictly positive."""


class InsufficientRows(PathDepthError, ValueError):
    """Too few training rows for the requested model."""


class EmptyTraining(PathDepthError, ValueError):
    """Training set is empty."""


class ModelFormatError(PathDepthError, ValueError):
    """Model file is truncated or otherwise unparseable."""


class UnknownModelKind(ModelFormatError):
    """Model file declares a kind this package does not implement."""


class VersionMismatch(ModelFormatError):
    """Model file version is not supported."""


# evaluation ----------------------------------------------------------------

class TooFewCities(PathDepthError, ValueError):
    """Holdout plans need at least two distinct cities."""


class EmptyErrors(PathDepthError, ValueError):
    """Error metrics are undefined on an empty error list."""


# warnings ------------------------------------------------------------------

class SingularDesignWarning(UserWarning):
    """Rank-deficient regression design; a minimum-norm fit was returned."""


class DegenerateFeatureWarning(UserWarning):
    """A feature had zero variance in the training split."""


class FlatModelWarning(UserWarning):
    """Obstacle-loss analysis of a model with no depth input."""
