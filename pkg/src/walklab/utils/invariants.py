# src/walklab/utils/invariants.py
"""Hard run-time invariants.

Checks raise ``InvariantViolation`` instead of using ``assert`` so they still run
under ``python -O``. Every check is tallied; reports carry the tally so a clean run
shows how many checks passed.
"""

from __future__ import annotations

import threading
from collections import Counter

_lock = threading.Lock()
_tally: Counter = Counter()


class InvariantViolation(RuntimeError):
    pass


def require(condition: bool, name: str, message: str = "") -> None:
    with _lock:
        _tally[name] += 1
    if not condition:
        raise InvariantViolation(f"{name}: {message}" if message else name)


def record_checks(name: str, count: int) -> None:
    """Tally ``count`` checks of ``name`` done in bulk (vectorized)."""
    with _lock:
        _tally[name] += int(count)


def tally() -> dict[str, int]:
    with _lock:
        return dict(sorted(_tally.items()))


def reset_tally() -> None:
    with _lock:
        _tally.clear()
