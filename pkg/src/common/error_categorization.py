"""
Error categorization for the ensemble library and experiment harness.
Defines the exception hierarchy and classifies failures into categories
that decide whether an operation is retried or a harness cell is skipped.
"""
import re
import socket
from enum import Enum
from typing import Any, Dict, Optional, Tuple

import requests


class ErrorCategory(Enum):
    """
    Categories for error classification.

    Used to decide retry behavior and how harness failures are reported.
    """
    DATA = "data"
    LEARNER = "learner"
    CONFIGURATION = "configuration"
    NETWORK = "network"
    SYSTEM = "system"
    UNKNOWN = "unknown"

    def is_retryable(self) -> bool:
        """
        Determine if errors of this category should be retried.

        Returns:
            True if errors of this category are typically transient
        """
        return self in {ErrorCategory.NETWORK, ErrorCategory.SYSTEM}


class GdmError(Exception):
    """Base class for all errors raised by this package."""
    pass


class DataError(GdmError, ValueError):
    """Raised for dataset ingestion, manifest and split failures."""

    def __init__(
        self,
        message: str,
        row: Optional[int] = None,
        column: Optional[str] = None,
    ):
        super().__init__(message)
        self.row = row
        self.column = column


class LearnerError(GdmError, ValueError):
    """Raised for invalid hyperparameters, degenerate settings and shape mismatches."""

    def __init__(self, message: str, kind: Optional[str] = None):
        super().__init__(message)
        self.kind = kind


class CommitteeError(GdmError):
    """Raised when a committee cannot be fitted, evaluated or (de)serialized."""
    pass


class ConfigurationError(GdmError):
    """Raised for invalid experiment configuration."""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field


class NetworkError(GdmError):
    """Raised when a dataset download fails."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.details = details or {}


class ErrorClassifier:
    """
    Classifies errors into categories for appropriate handling.

    Uses exception types first and falls back to message patterns.
    """

    # Checked in order, so subclasses must precede their bases.
    TYPE_CATEGORY_MAP = (
        (NetworkError, ErrorCategory.NETWORK),
        (requests.ConnectionError, ErrorCategory.NETWORK),
        (requests.Timeout, ErrorCategory.NETWORK),
        (socket.timeout, ErrorCategory.NETWORK),
        (ConnectionError, ErrorCategory.NETWORK),
        (DataError, ErrorCategory.DATA),
        (LearnerError, ErrorCategory.LEARNER),
        (CommitteeError, ErrorCategory.LEARNER),
        (ConfigurationError, ErrorCategory.CONFIGURATION),
        (FileNotFoundError, ErrorCategory.DATA),
        (PermissionError, ErrorCategory.SYSTEM),
        (OSError, ErrorCategory.SYSTEM),
        (MemoryError, ErrorCategory.SYSTEM),
    )

    MESSAGE_PATTERNS = [
        (re.compile(r'connection.*(refused|reset|timed?\s*out)', re.IGNORECASE), ErrorCategory.NETWORK),
        (re.compile(r'singular matrix|did not converge|non-finite', re.IGNORECASE), ErrorCategory.LEARNER),
        (re.compile(r'could not convert|invalid literal|missing value', re.IGNORECASE), ErrorCategory.DATA),
        (re.compile(r'no.*space.*left|out.*of.*memory', re.IGNORECASE), ErrorCategory.SYSTEM),
    ]

    def classify(self, error: BaseException) -> ErrorCategory:
        """
        Classify an error into an appropriate category.

        Args:
            error: The exception to classify

        Returns:
            The ErrorCategory for the error
        """
        for exc_type, category in self.TYPE_CATEGORY_MAP:
            if isinstance(error, exc_type):
                return category

        error_message = str(error)
        for pattern, category in self.MESSAGE_PATTERNS:
            if pattern.search(error_message):
                return category

        return ErrorCategory.UNKNOWN


def categorize_error(error: BaseException) -> Tuple[ErrorCategory, bool]:
    """
    Convenience function to categorize an error and determine retry behavior.

    Returns:
        Tuple of (ErrorCategory, is_retryable)
    """
    category = ErrorClassifier().classify(error)
    return category, category.is_retryable()
