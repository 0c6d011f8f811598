"""
Core module: settings, logging bootstrap and the shared exception hierarchy.
"""

from .config import Settings, get_settings
from .errors import (
    StaleboostError,
    ConfigurationError,
    DatasetError,
    LibSVMParseError,
    EmptyPartitionError,
    DimensionMismatchError,
    SamplingError,
    TreeBuildError,
    ProjectionError,
    TrainingError,
    ForestFormatError,
    TheoryError,
)
from .log_config import configure_logging

__all__ = [
    "Settings",
    "get_settings",
    "configure_logging",
    "StaleboostError",
    "ConfigurationError",
    "DatasetError",
    "LibSVMParseError",
    "EmptyPartitionError",
    "DimensionMismatchError",
    "SamplingError",
    "TreeBuildError",
    "ProjectionError",
    "TrainingError",
    "ForestFormatError",
    "TheoryError",
]
