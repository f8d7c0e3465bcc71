"""Runtime settings read from the environment."""

import os
import warnings
from dataclasses import dataclass
from typing import Optional

THREADS_ENV = "WGI_THREADS"
MEMORY_BUDGET_ENV = "WGI_MEMORY_BUDGET_GIB"
LOG_DIR_ENV = "WGI_LOG_DIR"
LOG_LEVEL_ENV = "WGI_LOG_LEVEL"

DEFAULT_MEMORY_BUDGET_GIB = 4.0
GIB = 1024 ** 3


@dataclass(frozen=True)
class RuntimeSettings:
    """Process-wide knobs that do not belong in a scenario file."""

    threads: int
    memory_budget_bytes: int
    log_dir: str
    log_level: str


def _positive_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw)
    except ValueError:
        warnings.warn(f"Ignoring {name}={raw!r}: not an integer")
        return default
    if value < 1:
        warnings.warn(f"Ignoring {name}={raw!r}: must be >= 1")
        return default
    return value


def _positive_float(name: str, default: float) -> float:
    raw = os.environ.get(name)
    if raw is None or not raw.strip():
        return default
    try:
        value = float(raw)
    except ValueError:
        warnings.warn(f"Ignoring {name}={raw!r}: not a number")
        return default
    if not value > 0:
        warnings.warn(f"Ignoring {name}={raw!r}: must be positive")
        return default
    return value


def get_settings(threads: Optional[int] = None) -> RuntimeSettings:
    """Build the settings from the current environment.

    Args:
        threads: explicit worker cap that takes precedence over ``WGI_THREADS``.
    """
    default_threads = os.cpu_count() or 1
    worker_cap = threads if threads is not None else _positive_int(THREADS_ENV, default_threads)
    budget_gib = _positive_float(MEMORY_BUDGET_ENV, DEFAULT_MEMORY_BUDGET_GIB)
    return RuntimeSettings(
        threads=max(1, worker_cap),
        memory_budget_bytes=int(budget_gib * GIB),
        log_dir=os.environ.get(LOG_DIR_ENV, "logs"),
        log_level=os.environ.get(LOG_LEVEL_ENV, "INFO").upper(),
    )
