# src/walklab/process/sequence.py
"""Lazily materialized two-sided state sequence of a driver."""

from __future__ import annotations

import logging
import threading

import numpy as np

from walklab.process.drivers import Driver, MarkovDriver
from walklab.utils.seeding import TAG_SITE, site_uniforms

logger = logging.getLogger(__name__)

GROW_CHUNK = 4096


class StateSequence:
    """
    States of ``driver`` at every integer site for one ``seed``.

    The cache covers a contiguous window that only ever grows; growth happens under
    a lock and publishes a new array, so readers always see a complete window.
    """

    def __init__(self, driver: Driver, seed: int) -> None:
        self.driver = driver
        self.seed = int(seed)
        self._lock = threading.Lock()
        self._snap: tuple[int, np.ndarray] = (0, np.empty(0, dtype=np.int32))

    @property
    def bounds(self) -> tuple[int, int]:
        lo, states = self._snap
        return lo, lo + len(states)

    def window(self, lo: int, hi: int) -> np.ndarray:
        """States at sites ``lo .. hi-1`` (read-only view)."""
        if hi < lo:
            raise ValueError(f"empty window [{lo}, {hi})")
        self.ensure(lo, hi)
        base, states = self._snap
        return states[lo - base: hi - base]

    def state_at(self, site: int) -> int:
        base, states = self._snap
        idx = site - base
        if 0 <= idx < len(states):
            return int(states[idx])
        return int(self.window(site, site + 1)[0])

    def ensure(self, lo: int, hi: int) -> None:
        cur_lo, cur_hi = self.bounds
        if len(self._snap[1]) and cur_lo <= lo and hi <= cur_hi:
            return
        with self._lock:
            cur_lo, cur_hi = self.bounds
            if len(self._snap[1]) and cur_lo <= lo and hi <= cur_hi:
                return
            if not len(self._snap[1]):
                new_lo = min(lo, 0) - GROW_CHUNK
                new_hi = max(hi, 1) + GROW_CHUNK
            else:
                new_lo = min(cur_lo, lo - GROW_CHUNK) if lo < cur_lo else cur_lo
                new_hi = max(cur_hi, hi + GROW_CHUNK) if hi > cur_hi else cur_hi
            states = self._materialize(new_lo, new_hi)
            logger.debug(f"Site cache grown to [{new_lo}, {new_hi})")
            # one tuple assignment, so unlocked readers see origin and array together
            self._snap = (new_lo, states)

    def _materialize(self, new_lo: int, new_hi: int) -> np.ndarray:
        if not self.driver.sequential:
            if len(self._snap[1]):
                cur_lo, cur_hi = self.bounds
                left = self.driver.direct_states(self.seed, np.arange(new_lo, cur_lo))
                right = self.driver.direct_states(self.seed, np.arange(cur_hi, new_hi))
                return np.concatenate([left, self._snap[1], right]).astype(np.int32)
            return self.driver.direct_states(self.seed, np.arange(new_lo, new_hi)).astype(np.int32)

        driver: MarkovDriver = self.driver  # type: ignore[assignment]
        if not len(self._snap[1]):
            first = driver.first_state(float(site_uniforms(self.seed, [0], TAG_SITE)[0]))
            core = np.array([first], dtype=np.int32)
            cur_lo, cur_hi = 0, 1
        else:
            core = self._snap[1]
            cur_lo, cur_hi = self.bounds

        right_sites = np.arange(cur_hi, new_hi)
        right = driver.forward(int(core[-1]), site_uniforms(self.seed, right_sites, TAG_SITE).tolist())
        # walk leftwards from cur_lo - 1 down to new_lo
        left_sites = np.arange(cur_lo - 1, new_lo - 1, -1)
        left = driver.backward(int(core[0]), site_uniforms(self.seed, left_sites, TAG_SITE).tolist())
        left.reverse()
        return np.concatenate(
            [np.asarray(left, dtype=np.int32), core, np.asarray(right, dtype=np.int32)]
        ).astype(np.int32)
