# src/walklab/walk/alias.py
"""Alias tables for drawing jumps with one uniform per draw."""

from __future__ import annotations

import numpy as np

from walklab.env import Environment, JumpLaw


def alias_setup(probs) -> tuple[np.ndarray, np.ndarray]:
    """
    Vose's alias construction.

    Returns ``(q, J)``: column ``k`` yields outcome ``k`` with probability ``q[k]``
    and outcome ``J[k]`` otherwise. Zero-mass outcomes get ``q = 0``.
    """
    probs = np.asarray(probs, dtype=float)
    K = len(probs)
    q = probs * K
    J = np.arange(K, dtype=np.int64)

    smaller = [k for k in range(K) if q[k] < 1.0]
    larger = [k for k in range(K) if q[k] >= 1.0]
    while smaller and larger:
        small = smaller.pop()
        large = larger.pop()
        J[small] = large
        q[large] = q[large] - (1.0 - q[small])
        if q[large] < 1.0:
            smaller.append(large)
        else:
            larger.append(large)
    # leftovers are 1 up to rounding
    for k in smaller + larger:
        if q[k] > 0.5:
            q[k] = 1.0
    return q, J


class AliasTable:
    """
    One alias table per driver state, all over the same offset grid.

    A draw splits a single uniform ``u`` into a column ``k = floor(u K)`` and a coin
    ``u K - k``; the scalar and the vectorized draw do the same float arithmetic, so
    they return the same jump for the same ``u``.
    """

    def __init__(self, laws: tuple[JumpLaw, ...]) -> None:
        grid = sorted({y for law in laws for y in law.offsets})
        self.offsets = np.asarray(grid, dtype=np.int64)
        self.K = len(grid)
        index = {y: i for i, y in enumerate(grid)}

        self.q = np.zeros((len(laws), self.K))
        self.J = np.zeros((len(laws), self.K), dtype=np.int64)
        for s, law in enumerate(laws):
            probs = np.zeros(self.K)
            for y, p in zip(law.offsets, law.probs):
                probs[index[y]] = p
            self.q[s], self.J[s] = alias_setup(probs)

        # python-side copies for the scalar loop
        self._offsets_list = self.offsets.tolist()
        self._q_list = self.q.tolist()
        self._J_list = self.J.tolist()

    @classmethod
    def for_environment(cls, env: Environment) -> "AliasTable":
        return cls(env.laws)

    def draw(self, states: np.ndarray, u: np.ndarray) -> np.ndarray:
        t = u * self.K
        k = t.astype(np.int64)
        coin = t - k
        keep = coin < self.q[states, k]
        return np.where(keep, self.offsets[k], self.offsets[self.J[states, k]])

    def draw_one(self, state: int, u: float) -> int:
        t = u * self.K
        k = int(t)
        if t - k < self._q_list[state][k]:
            return self._offsets_list[k]
        return self._offsets_list[self._J_list[state][k]]
