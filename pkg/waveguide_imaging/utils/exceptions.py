"""Custom exception classes for the waveguide imaging toolkit."""

from typing import Any, Dict, Optional


class WaveguideImagingError(Exception):
    """Base exception class for the toolkit."""

    exit_code = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def __str__(self) -> str:
        if self.details:
            return f"{self.message} (Details: {self.details})"
        return self.message


class ConfigurationError(WaveguideImagingError):
    """Raised when a scenario file cannot be parsed."""
    pass


class ValidationError(WaveguideImagingError):
    """Raised when input validation fails."""
    pass


class FileOperationError(WaveguideImagingError):
    """Raised when file operations fail."""
    pass


class CorruptedDataError(WaveguideImagingError):
    """Raised when a binary file has a bad header or payload size."""
    pass


class MissingInputError(WaveguideImagingError):
    """Raised when a pipeline stage cannot find its input file."""
    pass


class StaleCacheError(WaveguideImagingError):
    """Raised when a cache file was built for a different scenario."""
    pass


class SystemLimitError(WaveguideImagingError):
    """Raised when system limits are exceeded."""
    pass


class MemoryBudgetError(SystemLimitError):
    """Raised when a dense matrix would not fit in the memory budget."""
    pass


class ModeIndexError(ValidationError):
    """Raised for an invalid mode index (n1, n2, s)."""
    pass


class GeometryError(ValidationError):
    """Raised when a point lies outside the waveguide or on a forbidden plane."""
    pass


class NumericalError(WaveguideImagingError):
    """Base class for numerical failures."""

    exit_code = 2


class CutoffError(NumericalError):
    """Raised when a mode sits at cutoff and its axial wavenumber vanishes."""
    pass


class DivergenceError(NumericalError):
    """Raised when the Born series stops contracting."""
    pass


class ConvergenceError(NumericalError):
    """Raised when an iterative solver fails in strict mode."""
    pass


class PipelineStageError(WaveguideImagingError):
    """Raised when a pipeline stage fails; carries the stage tag."""

    def __init__(self, stage: str, error: Exception):
        super().__init__(f"Stage '{stage}' failed: {error}", {"stage": stage})
        self.stage = stage
        self.error = error
        self.exit_code = getattr(error, "exit_code", 1)
