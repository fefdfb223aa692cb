"""
Exception hierarchy shared by the library and the command line.

Every class carries the exit code the CLI returns when it escapes a command.
"""


class CrowdAnomalyError(Exception):
    """Base class for all pipeline errors."""

    exit_code = 1


class ConfigurationError(CrowdAnomalyError, ValueError):
    """Invalid parameters or flag combinations."""

    exit_code = 2


class DataError(CrowdAnomalyError, ValueError):
    """Input data that cannot be used as given."""

    exit_code = 3


class FrameLoadError(DataError):
    """A frame directory or one of its files is unreadable."""


class ManifestError(DataError):
    """Malformed manifest or invalid label intervals."""


class DimensionMismatchError(DataError):
    """Vector, matrix or model dimensions disagree."""


class InsufficientDataError(DataError):
    """Too few samples, frames or cubes for the requested operation."""


class SchemaError(DataError):
    """A serialized document fails its JSON schema or has the wrong schema_version."""


class UnknownLabelError(DataError):
    """A label outside the classifier's label set."""


class NumericError(CrowdAnomalyError, ArithmeticError):
    """Factorization failure or non-finite numeric result."""

    exit_code = 4
