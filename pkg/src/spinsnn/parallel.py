"""Worker-count control for the embarrassingly parallel Monte Carlo loops.

Work is split into fixed blocks whose random streams depend only on the
block index, and results are reduced in block order, so output never
depends on the number of workers.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

_workers: int | None = None


def set_workers(n: int | None) -> None:
    """Cap worker threads; ``None`` or 0 means all available cores."""
    global _workers
    if n is not None and n < 0:
        raise ValueError("worker count must be non-negative")
    _workers = n or None


def workers() -> int:
    if _workers:
        return _workers
    if hasattr(os, "sched_getaffinity"):
        return len(os.sched_getaffinity(0))
    return os.cpu_count() or 1


def pmap(fn, items) -> list:
    """Ordered map over ``items`` on up to ``workers()`` threads."""
    items = list(items)
    n = min(workers(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
