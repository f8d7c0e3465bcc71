"""Block-parallel helpers for the numerical kernels."""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Tuple, TypeVar

from .settings import get_settings

T = TypeVar("T")

DEFAULT_BLOCK = 256


def worker_count(threads: Optional[int] = None) -> int:
    """Number of worker threads, capped by ``WGI_THREADS``."""
    return get_settings(threads).threads


def row_blocks(n_rows: int, block_rows: int = DEFAULT_BLOCK) -> List[Tuple[int, int]]:
    if block_rows < 1:
        raise ValueError("block_rows must be positive")
    return [(start, min(start + block_rows, n_rows)) for start in range(0, n_rows, block_rows)]


def map_row_blocks(fn: Callable[[int, int], T], n_rows: int, block_rows: int = DEFAULT_BLOCK,
                   threads: Optional[int] = None) -> List[T]:
    """Run ``fn(start, stop)`` over fixed-size blocks and return results in block order.

    Block boundaries depend only on ``n_rows`` and ``block_rows``, never on the
    worker count, so reductions over the returned list are reproducible.
    """
    blocks = row_blocks(n_rows, block_rows)
    workers = min(worker_count(threads), max(1, len(blocks)))
    if workers == 1:
        return [fn(start, stop) for start, stop in blocks]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(lambda b: fn(*b), blocks))
