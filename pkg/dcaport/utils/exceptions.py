"""
Custom exceptions for dcaport.

Provides a hierarchy of exceptions for the different failure modes of
instance handling, solving and reporting, with actionable messages.
"""

from typing import List, Optional


class DcaportError(Exception):
    """Base exception for all dcaport errors."""

    pass


class DimensionError(DcaportError):
    """Raised when array shapes disagree with the instance size."""

    pass


class ValidationError(DcaportError):
    """Raised when an instance is not usable for solving."""

    def __init__(self, message: str,
                 violations: Optional[List[str]] = None):
        super().__init__(message)
        self.violations = list(violations or [])


class DataFormatError(DcaportError):
    """Raised when an input file cannot be parsed."""

    def __init__(self, message: str, line: Optional[int] = None,
                 column: Optional[int] = None):
        location = ""
        if line is not None:
            location = f" (line {line}"
            location += f", column {column})" if column is not None else ")"
        super().__init__(message + location)
        self.line = line
        self.column = column


class FileAccessError(DcaportError):
    """Raised when a file cannot be accessed or read."""

    pass


class ConfigurationError(DcaportError):
    """Raised when configuration is invalid."""

    pass


class QpError(DcaportError):
    """Raised when the QP solver cannot proceed."""

    pass


class QpInvariantError(QpError):
    """Raised when a QP problem violates its structural invariants."""

    pass


class DomainError(DcaportError):
    """Raised when an argument lies outside the domain of a function."""

    pass


class InfeasibleError(DcaportError):
    """Raised when a model or a restricted model admits no feasible point."""

    pass


class CombinatorialGuardError(DcaportError):
    """Raised when support enumeration would exceed its size guard."""

    pass


class ReportGenerationError(DcaportError):
    """Raised when report generation fails."""

    pass


class StorageError(DcaportError):
    """Raised when persisting benchmark results fails."""

    pass
