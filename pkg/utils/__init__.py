"""Utils package for helper utilities."""
from .logger import Logger
from .data_manager import DataManager
from .errors import (
    ConfigurationError,
    CrowdAnomalyError,
    DataError,
    DimensionMismatchError,
    FrameLoadError,
    InsufficientDataError,
    ManifestError,
    NumericError,
    SchemaError,
    UnknownLabelError,
)

__all__ = [
    "Logger",
    "DataManager",
    "CrowdAnomalyError",
    "ConfigurationError",
    "DataError",
    "DimensionMismatchError",
    "FrameLoadError",
    "InsufficientDataError",
    "ManifestError",
    "NumericError",
    "SchemaError",
    "UnknownLabelError",
]
