# src/walklab/regen/descriptors.py
"""Integer codes for local environment descriptors (driver states on a window around a site)."""

from __future__ import annotations

import numpy as np

from walklab.env import Environment

MAX_DESCRIPTORS = 1 << 20


class DescriptorError(ValueError):
    pass


def check_descriptor_space(env: Environment, half_width: int) -> None:
    if half_width < 0:
        raise DescriptorError(f"half_width must be >= 0, got {half_width}")
    if env.n_states ** (2 * half_width + 1) > MAX_DESCRIPTORS:
        raise DescriptorError(
            f"{env.n_states} states with half_width {half_width} give too many descriptors to tabulate"
        )


def descriptor_codes(env: Environment, positions: np.ndarray, half_width: int = 0) -> np.ndarray:
    """Code of the window ``x-w .. x+w`` for every position x (base ``n_states``, leftmost digit first)."""
    positions = np.asarray(positions, dtype=np.int64)
    if len(positions) == 0:
        return np.zeros(0, dtype=np.int64)
    lo = int(positions.min()) - half_width
    hi = int(positions.max()) + half_width + 1
    states = env.states(lo, hi).astype(np.int64)
    n = env.n_states
    codes = np.zeros(len(positions), dtype=np.int64)
    for j in range(-half_width, half_width + 1):
        codes = codes * n + states[positions + j - lo]
    return codes


def decode(code: int, n_states: int, half_width: int) -> tuple[int, ...]:
    digits = []
    for _ in range(2 * half_width + 1):
        code, d = divmod(int(code), n_states)
        digits.append(d)
    return tuple(reversed(digits))


def count_codes(codes: np.ndarray) -> dict[int, int]:
    values, counts = np.unique(codes, return_counts=True)
    return {int(v): int(c) for v, c in zip(values, counts)}
