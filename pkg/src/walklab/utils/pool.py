# src/walklab/utils/pool.py
"""Worker pool for independent replica jobs."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

_default_threads = 1


def set_default_threads(threads: int) -> None:
    """Pool size used when callers do not pass ``threads`` (set once by the CLI)."""
    global _default_threads
    _default_threads = max(1, int(threads))


def get_default_threads() -> int:
    return _default_threads


def map_replicas(fn: Callable[[T], R], items: Iterable[T], threads: int | None = None) -> list[R]:
    """
    Apply ``fn`` to every item and return results in input order.

    Jobs must not share mutable state; each receives its own seed stream.
    """
    items = list(items)
    threads = _default_threads if threads is None else max(1, int(threads))
    if threads == 1 or len(items) <= 1:
        return [fn(item) for item in items]

    logger.debug(f"Running {len(items)} replica jobs on {threads} threads")
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
