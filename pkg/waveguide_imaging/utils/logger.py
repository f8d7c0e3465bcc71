"""Centralized logging system for the waveguide imaging toolkit."""

import logging
import logging.handlers
import pathlib
from typing import Optional, Dict, Any

from .settings import get_settings


class AppLogger:
    """Centralized logging manager for the toolkit."""

    _instance: Optional['AppLogger'] = None
    _loggers: Dict[str, logging.Logger] = {}

    def __new__(cls) -> 'AppLogger':
        """Singleton pattern to ensure one logger instance."""
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __init__(self) -> None:
        """Initialize the logging system."""
        if not hasattr(self, '_initialized'):
            self._initialized = True
            settings = get_settings()
            self.log_dir: Optional[pathlib.Path] = pathlib.Path(settings.log_dir)
            try:
                self.log_dir.mkdir(parents=True, exist_ok=True)
            except OSError:
                self.log_dir = None
            self._setup_root_logger(settings.log_level)

    def _setup_root_logger(self, console_level: str) -> None:
        """Set up the package root logger."""
        detailed_formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(funcName)s:%(lineno)d - %(message)s'
        )
        simple_formatter = logging.Formatter('%(asctime)s - %(levelname)s - %(message)s')

        root_logger = logging.getLogger('waveguide_imaging')
        root_logger.setLevel(logging.DEBUG)

        console_handler = logging.StreamHandler()
        console_handler.setLevel(getattr(logging, console_level, logging.INFO))
        console_handler.setFormatter(simple_formatter)
        root_logger.addHandler(console_handler)

        if self.log_dir is not None:
            try:
                file_handler = logging.handlers.RotatingFileHandler(
                    self.log_dir / "waveguide_imaging.log",
                    maxBytes=10 * 1024 * 1024, backupCount=5,
                )
                file_handler.setLevel(logging.DEBUG)
                file_handler.setFormatter(detailed_formatter)

                error_handler = logging.handlers.RotatingFileHandler(
                    self.log_dir / "waveguide_imaging_errors.log",
                    maxBytes=5 * 1024 * 1024, backupCount=3,
                )
                error_handler.setLevel(logging.ERROR)
                error_handler.setFormatter(detailed_formatter)

                root_logger.addHandler(file_handler)
                root_logger.addHandler(error_handler)
            except OSError:
                self.log_dir = None

        # Prevent duplicate logs
        root_logger.propagate = False

    def get_logger(self, name: str) -> logging.Logger:
        """Child logger ``waveguide_imaging.<name>``, cached per name."""
        full_name = f"waveguide_imaging.{name}"
        if full_name not in self._loggers:
            self._loggers[full_name] = logging.getLogger(full_name)
        return self._loggers[full_name]

    def _emit(self, logger_name: str, level: int, message: str,
              details: Optional[Dict[str, Any]] = None, exc_info: bool = False) -> None:
        suffix = f" | {details}" if details else ""
        self.get_logger(logger_name).log(level, f"{message}{suffix}", exc_info=exc_info)

    def log_operation(self, logger_name: str, operation: str,
                      details: Optional[Dict[str, Any]] = None) -> None:
        self._emit(logger_name, logging.INFO, f"Operation: {operation}", details)

    def log_error(self, logger_name: str, error: Exception, context: str,
                  details: Optional[Dict[str, Any]] = None) -> None:
        """Log ``error`` raised while doing ``context``; the traceback goes to the error log."""
        merged = dict(getattr(error, "details", None) or {})
        merged.update(details or {})
        self._emit(logger_name, logging.ERROR,
                   f"{context} failed: {type(error).__name__}: {error}", merged, exc_info=True)

    def log_warning(self, logger_name: str, message: str,
                    details: Optional[Dict[str, Any]] = None) -> None:
        self._emit(logger_name, logging.WARNING, message, details)

    def log_debug(self, logger_name: str, message: str,
                  details: Optional[Dict[str, Any]] = None) -> None:
        self._emit(logger_name, logging.DEBUG, message, details)

    def log_stage(self, stage: str, seconds: float,
                  details: Optional[Dict[str, Any]] = None) -> None:
        """Wall time of a finished pipeline stage."""
        self._emit("pipeline", logging.INFO, f"Stage {stage}: {seconds:.3f}s", details)

    def log_startup(self, version: str = "unknown") -> None:
        where = self.log_dir.absolute() if self.log_dir is not None else "console only"
        self._emit("app", logging.DEBUG, f"waveguide-imaging {version}, logs: {where}")


app_logger = AppLogger()


def get_logger(name: str) -> logging.Logger:
    return app_logger.get_logger(name)


def log_operation(logger_name: str, operation: str,
                  details: Optional[Dict[str, Any]] = None) -> None:
    app_logger.log_operation(logger_name, operation, details)


def log_error(logger_name: str, error: Exception, context: str,
              details: Optional[Dict[str, Any]] = None) -> None:
    app_logger.log_error(logger_name, error, context, details)


def log_warning(logger_name: str, message: str,
                details: Optional[Dict[str, Any]] = None) -> None:
    app_logger.log_warning(logger_name, message, details)


def log_debug(logger_name: str, message: str,
              details: Optional[Dict[str, Any]] = None) -> None:
    app_logger.log_debug(logger_name, message, details)


def log_stage(stage: str, seconds: float, details: Optional[Dict[str, Any]] = None) -> None:
    app_logger.log_stage(stage, seconds, details)
