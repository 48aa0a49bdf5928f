from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

WEIGHT_TOL = 1e-9


@dataclass(frozen=True)
class EnvOccupation:
    """Finite-support law of a local environment descriptor (tuple of driver states)."""

    support: tuple[tuple[int, ...], ...]
    weights: np.ndarray
    meta: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        if len(w) != len(self.support):
            raise ValueError("support and weights differ in length")
        if np.any(w < 0.0) or abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights must be a probability vector (sum {w.sum()!r})")
        object.__setattr__(self, "weights", w)

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return {d: float(w) for d, w in zip(self.support, self.weights)}

    def weight(self, descriptor: tuple[int, ...]) -> float:
        return self.as_dict().get(tuple(descriptor), 0.0)

    def tv_distance(self, other: "EnvOccupation") -> float:
        mine, theirs = self.as_dict(), other.as_dict()
        keys = set(mine) | set(theirs)
        return 0.5 * sum(abs(mine.get(k, 0.0) - theirs.get(k, 0.0)) for k in keys)

    def summary(self) -> dict[str, Any]:
        return {
            "support": [list(d) for d in self.support],
            "weights": self.weights.tolist(),
            **self.meta,
        }


def occupation_from_counts(counts: Mapping[tuple[int, ...], float], **meta) -> EnvOccupation:
    support = tuple(sorted(counts))
    total = float(sum(counts.values()))
    if total <= 0.0:
        raise ValueError("no occupation mass")
    weights = np.array([counts[d] / total for d in support])
    return EnvOccupation(support=support, weights=weights / weights.sum(), meta=dict(meta))
