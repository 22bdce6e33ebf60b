"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: ValidationError -> 1, AudioIOError -> 2,
DegenerateDataError -> 3.
"""


class VocalriskError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(VocalriskError):
    """Bad user input: out-of-range scores, malformed manifests, bad configs."""


class AudioIOError(VocalriskError):
    """Unreadable, truncated, or unsupported audio files."""


class DegenerateDataError(VocalriskError):
    """Statistics cannot be computed: empty groups, constant data, singular fits."""
