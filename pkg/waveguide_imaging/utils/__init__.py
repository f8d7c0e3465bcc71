"""Utilities package for the waveguide imaging toolkit."""

from .logger import (
    get_logger, log_operation, log_error, log_warning, log_debug, log_stage, app_logger
)
from .exceptions import (
    WaveguideImagingError, ConfigurationError, ValidationError, FileOperationError,
    CorruptedDataError, MissingInputError, StaleCacheError, SystemLimitError, MemoryBudgetError,
    ModeIndexError, GeometryError, NumericalError, CutoffError, DivergenceError,
    ConvergenceError, PipelineStageError
)
from .validators import (
    validate_scenario, scenario_violations, validate_file_path, validate_output_dir,
    PathValidator, ScenarioValidator, NumericValidator
)
from .settings import RuntimeSettings, get_settings
from .parallel import worker_count, map_row_blocks
from .version import get_version, get_version_info, get_full_version_string, VERSION

__all__ = [
    # Logger
    'get_logger', 'log_operation', 'log_error', 'log_warning', 'log_debug', 'log_stage',
    'app_logger',
    # Exceptions
    'WaveguideImagingError', 'ConfigurationError', 'ValidationError', 'FileOperationError',
    'CorruptedDataError', 'MissingInputError', 'StaleCacheError', 'SystemLimitError',
    'MemoryBudgetError', 'ModeIndexError', 'GeometryError', 'NumericalError', 'CutoffError',
    'DivergenceError', 'ConvergenceError', 'PipelineStageError',
    # Validators
    'validate_scenario', 'scenario_violations', 'validate_file_path', 'validate_output_dir',
    'PathValidator', 'ScenarioValidator', 'NumericValidator',
    # Settings and parallelism
    'RuntimeSettings', 'get_settings', 'worker_count', 'map_row_blocks',
    # Version utilities
    'get_version', 'get_version_info', 'get_full_version_string', 'VERSION',
]
