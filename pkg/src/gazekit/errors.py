"""Error taxonomy shared by every gazekit module.

Each error carries a stable ``code`` (the class name) so the HTTP layer and
the CLI can report machine-readable failures without string matching.
"""


class GazekitError(Exception):
    """Base class for all gazekit errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


# --- ingest ---------------------------------------------------------------

class EmptyLog(GazekitError):
    """Gaze log contains no data rows."""


class SchemaError(GazekitError):
    """Header or document structure does not match the documented schema."""


class CorruptLog(GazekitError):
    """More than half of the data rows are malformed."""


class GeometryError(GazekitError):
    """AOI polygon is degenerate (fewer than 3 vertices or zero area)."""


# --- fixation -------------------------------------------------------------

class NoValidSamples(GazekitError):
    """Recording has no valid gaze samples."""


# --- cluster --------------------------------------------------------------

class TooFewPoints(GazekitError):
    """Fewer points than requested clusters."""


class DegenerateInput(GazekitError):
    """All points identical; multi-component fit is undefined."""


class UndefinedForK1(GazekitError):
    """Xie-Beni index requires at least 2 clusters."""


class DegenerateSeparation(GazekitError):
    """Cluster centers coincide; Xie-Beni separation term vanishes."""


class NoValidModel(GazekitError):
    """Every candidate k in a sweep failed to fit."""


# --- sequence -------------------------------------------------------------

class OutOfBounds(GazekitError):
    """Coordinate lies outside the screen."""


class NoFixations(GazekitError):
    """Operation requires at least one fixation."""


# --- stats ----------------------------------------------------------------

class InsufficientData(GazekitError):
    """A group or series has too few observations."""


class DegenerateVariance(GazekitError):
    """No variance anywhere; F statistic undefined."""


class IncompleteDesign(GazekitError):
    """Repeated-measures matrix has missing cells."""


class ZeroVariance(GazekitError):
    """A series is constant; correlation undefined."""


class ShapeError(GazekitError):
    """Input arrays have incompatible shapes."""


# --- render ---------------------------------------------------------------

class BadWindow(GazekitError):
    """Time window has t0 > t1."""


# --- service --------------------------------------------------------------

class NotFound(GazekitError):
    """Unknown recording or job id."""


class ValidationError(GazekitError):
    """Request parameters failed validation; message names the field."""
