"""Exception types shared across the package."""


class MpilabError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(MpilabError):
    """Invalid argument, configuration, or violated type invariant."""


class DegenerateHomographyError(MpilabError):
    """Plane-induced homography is numerically degenerate, typically because
    the mapped camera sits on or behind the plane."""


class RotationMismatchError(MpilabError):
    """Camera pair is not in the translation-only regime required by the
    normalized-view analysis."""


class ContractViolationError(MpilabError):
    """A pluggable predictor returned output violating its contract."""


class PipelineStageError(MpilabError):
    """Failure inside a named stage of the two-step pipeline."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}': {cause}")
        self.stage = stage


class EmptyRegionError(MpilabError):
    """A metric was requested over an empty pixel set."""


class FormatError(MpilabError):
    """Base class for persistence-format problems."""


class VersionError(FormatError):
    """Stored format version is newer than this package supports."""


class MetadataError(FormatError):
    """Missing, malformed, or self-inconsistent metadata."""


class PlaneCountError(FormatError):
    """Number of plane files on disk disagrees with the metadata."""


class CorruptPlaneError(FormatError):
    """A plane image file is unreadable or has the wrong shape."""
