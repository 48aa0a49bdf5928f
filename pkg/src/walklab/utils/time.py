# src/walklab/utils/time.py
import time
from datetime import datetime, timezone


def now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


class Stopwatch:
    """Wall-clock timer for report metadata."""

    def __init__(self) -> None:
        self.started_at = now_iso()
        self._t0 = time.perf_counter()

    def elapsed(self) -> float:
        return time.perf_counter() - self._t0
