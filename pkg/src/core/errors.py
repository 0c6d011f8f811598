"""
Exception hierarchy shared by all packages.
"""

from typing import Optional


class StaleboostError(Exception):
    """Base class for all domain errors"""
    pass


class ConfigurationError(StaleboostError, ValueError):
    """Raised when a configuration value is invalid"""
    pass


class DatasetError(StaleboostError):
    """Raised when a dataset cannot be built or used"""
    pass


class LibSVMParseError(DatasetError):
    """Raised when a LIBSVM line is malformed"""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class EmptyPartitionError(DatasetError):
    """Raised when a train/test split would leave a part empty"""
    pass


class DimensionMismatchError(StaleboostError, ValueError):
    """Raised when two vectors or a vector and a dataset disagree in size"""

    def __init__(self, expected: int, actual: int, what: str = "vector"):
        self.expected = expected
        self.actual = actual
        super().__init__(f"{what} has dimension {actual}, expected {expected}")


class SamplingError(StaleboostError, ValueError):
    """Raised when a sampling plan is invalid"""
    pass


class TreeBuildError(StaleboostError):
    """Raised when a tree cannot be fit"""
    pass


class ProjectionError(StaleboostError):
    """Raised when a leaf block has zero total weight"""
    pass


class TrainingError(StaleboostError):
    """Raised when a training run cannot continue"""
    pass


class ForestFormatError(StaleboostError):
    """Raised when a serialized forest cannot be parsed"""
    pass


class TheoryError(StaleboostError, ValueError):
    """Raised when a theory formula receives an out-of-domain input"""
    pass
