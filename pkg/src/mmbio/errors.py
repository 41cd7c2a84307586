"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: UsageError -> 1, DataError -> 2,
PipelineError -> 3.
"""


class MmbioError(Exception):
    """Base class for all package errors."""


class UsageError(MmbioError):
    """Bad invocation: unknown config key, malformed flag value, ..."""


class DataError(MmbioError):
    """Input data is missing, malformed or insufficient."""


class PipelineError(MmbioError):
    """A processing stage failed on otherwise readable data."""


class ImageFormatError(DataError):
    """Unsupported or corrupt image file."""


class TemplateFormatError(DataError):
    """Template file violates the binary layout."""


class ChecksumError(TemplateFormatError):
    """Template trailer CRC does not match the payload."""


class VersionError(TemplateFormatError):
    """Template was written with an unsupported format version."""


class AlignmentError(PipelineError):
    """No alignment hypothesis could be formed (an empty minutiae set)."""


class PupilNotFoundError(PipelineError):
    """No connected component survived the pupil candidate filters."""


class UnwrapError(PipelineError):
    """Pupil geometry leaves no room for a polar unwrap."""


class IncomparableCodesError(PipelineError):
    """Two iris codes share no jointly valid bit positions."""


class CalibrationError(UsageError):
    """Score-normalization bounds are degenerate (hi <= lo)."""
