"""
Custom exceptions for MRFM spin detection.
"""

import builtins


class SpinDetectionError(Exception):
    """Base exception for spin detection operations."""
    pass


class ModelError(SpinDetectionError):
    """Raised when signal model or filter parameters are invalid."""
    pass


class DataValidationError(SpinDetectionError):
    """Raised when observation data fails validation."""
    pass


class ParseError(SpinDetectionError):
    """Raised when reading or writing CSV records fails."""
    pass


class FileNotFoundError(SpinDetectionError, builtins.FileNotFoundError):
    """Raised when required files are not found."""
    pass


class ConfigurationError(SpinDetectionError):
    """Raised when an experiment configuration is invalid."""
    pass


class HarnessError(SpinDetectionError):
    """Raised when a Monte-Carlo run cannot satisfy its protocol."""
    pass


class NumericalError(SpinDetectionError):
    """Raised when a recursion or linear solve loses numerical validity."""
    pass
