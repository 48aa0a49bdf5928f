# src/walklab/env/jump_law.py
"""Jump laws on Z and the truncation that defines the walk S^rho."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

PROB_TOL = 1e-12
DEFAULT_MAX_JUMP = 64


class JumpLawError(ValueError):
    pass


@dataclass(frozen=True)
class TruncationLevel:
    """Truncation level rho >= 2, or infinity (no truncation)."""

    rho: float

    def __post_init__(self) -> None:
        if not (self.rho == math.inf or (float(self.rho).is_integer() and self.rho >= 2)):
            raise JumpLawError(f"rho must be an integer >= 2 or infinity, got {self.rho}")
        if self.rho != math.inf:
            object.__setattr__(self, "rho", int(self.rho))

    @property
    def is_infinite(self) -> bool:
        return self.rho == math.inf

    def cuts(self, y: int) -> bool:
        return abs(y) >= self.rho

    def effective(self, max_offset: int) -> int:
        """Finite stand-in: the smallest level that no available jump reaches."""
        if self.is_infinite:
            return max(2, max_offset + 1)
        return min(int(self.rho), max(2, max_offset + 1))

    def label(self) -> str:
        return "inf" if self.is_infinite else str(self.rho)

    def __str__(self) -> str:
        return self.label()


INFINITY = TruncationLevel(math.inf)


def as_rho(value: Any) -> TruncationLevel:
    if isinstance(value, TruncationLevel):
        return value
    if value is None or (isinstance(value, str) and value.strip().lower() in ("inf", "infinity", "∞")):
        return INFINITY
    if isinstance(value, float) and math.isinf(value):
        return INFINITY
    if isinstance(value, bool) or not float(value).is_integer():
        raise JumpLawError(f"rho must be an integer >= 2 or 'inf', got {value!r}")
    return TruncationLevel(int(value))


@dataclass(frozen=True)
class JumpLaw:
    """
    Law of one jump Y on Z: ``P[Y = offsets[i]] = probs[i]``.

    Offsets are strictly increasing and carry positive mass. ``folded`` records the
    masses that truncation moved onto offset 0 (including any original holding mass),
    so the holding probability is always the exactly rounded sum of the same terms,
    whatever order the truncations were applied in.
    """

    offsets: tuple[int, ...]
    probs: tuple[float, ...]
    tail_exponent: float | None = None
    tail_coeff: float | None = None
    max_jump: int = DEFAULT_MAX_JUMP
    folded: tuple[tuple[int, float], ...] = field(default=(), compare=True)

    def __post_init__(self) -> None:
        if len(self.offsets) != len(self.probs) or not self.offsets:
            raise JumpLawError("offsets and probs must be non-empty and of equal length")
        if any(b <= a for a, b in zip(self.offsets, self.offsets[1:])):
            raise JumpLawError(f"offsets must be strictly increasing, got {self.offsets}")
        if any(p <= 0.0 or not math.isfinite(p) for p in self.probs):
            raise JumpLawError("probabilities must be positive and finite")
        if abs(math.fsum(self.probs) - 1.0) > PROB_TOL:
            raise JumpLawError(f"probabilities sum to {math.fsum(self.probs)!r}, not 1")
        if max(abs(y) for y in self.offsets) > self.max_jump:
            raise JumpLawError(f"jump beyond the cutoff W_J={self.max_jump}")
        if self.tail_exponent is not None and self.tail_exponent <= 1.0:
            raise JumpLawError(f"tail exponent must exceed 1, got {self.tail_exponent}")
        if self.tail_coeff is not None and self.tail_coeff <= 0.0:
            raise JumpLawError(f"tail coefficient must be positive, got {self.tail_coeff}")

    @classmethod
    def from_mapping(cls, jumps: Mapping[Any, float], **kwargs) -> "JumpLaw":
        """Build from ``{offset: prob}``; zero-mass entries are dropped."""
        items = sorted((int(y), float(p)) for y, p in jumps.items() if float(p) != 0.0)
        if any(p < 0.0 for _, p in items):
            raise JumpLawError("probabilities must be nonnegative")
        return cls(
            offsets=tuple(y for y, _ in items),
            probs=tuple(p for _, p in items),
            **kwargs,
        )

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.offsets, self.probs))

    def prob(self, y: int) -> float:
        return self.as_dict().get(int(y), 0.0)

    def tail_mass(self, s: int) -> float:
        """Total mass at |y| >= s."""
        return math.fsum(p for y, p in zip(self.offsets, self.probs) if abs(y) >= s)

    def mean(self) -> float:
        return math.fsum(y * p for y, p in zip(self.offsets, self.probs))

    @property
    def max_offset(self) -> int:
        return max(abs(y) for y in self.offsets)

    def spec(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "jumps": {str(y): p for y, p in zip(self.offsets, self.probs)},
            "max_jump": self.max_jump,
        }
        if self.tail_exponent is not None:
            out["tail_exponent"] = self.tail_exponent
        if self.tail_coeff is not None:
            out["tail_coeff"] = self.tail_coeff
        return out


def truncate(law: JumpLaw, rho: Any) -> JumpLaw:
    """
    Move the mass of every offset with |y| >= rho onto offset 0.

    Offsets with 0 < |y| < rho keep their mass; rho = inf returns ``law`` itself.
    """
    level = as_rho(rho)
    cut = [(y, p) for y, p in zip(law.offsets, law.probs) if y != 0 and level.cuts(y)]
    if not cut:
        return law

    folded = dict(law.folded)
    if not folded and 0 in law.offsets:
        folded[0] = law.prob(0)
    for y, p in cut:
        folded[y] = p
    folded_items = tuple(sorted(folded.items()))
    hold = math.fsum(p for _, p in folded_items)

    kept = {y: p for y, p in zip(law.offsets, law.probs) if y != 0 and not level.cuts(y)}
    kept[0] = hold
    items = sorted(kept.items())
    return JumpLaw(
        offsets=tuple(y for y, _ in items),
        probs=tuple(p for _, p in items),
        tail_exponent=law.tail_exponent,
        tail_coeff=law.tail_coeff,
        max_jump=law.max_jump,
        folded=folded_items,
    )


def power_tail_law(
    base: Mapping[Any, float],
    tail_mass: float,
    alpha: float,
    max_jump: int = DEFAULT_MAX_JUMP,
    min_jump: int = 2,
    right_share: float = 0.5,
) -> JumpLaw:
    """
    Scale ``base`` by ``1 - tail_mass`` and spread ``tail_mass`` over
    ``min_jump <= |y| <= max_jump`` with weights proportional to ``s**(-alpha-1)``.

    The declared tail coefficient is the smallest gamma1 with
    ``tail_mass(s) <= gamma1 * s**(-alpha)`` for all s >= 1.
    """
    if not 0.0 <= tail_mass < 1.0:
        raise JumpLawError(f"tail_mass must lie in [0, 1), got {tail_mass}")
    if alpha <= 1.0:
        raise JumpLawError(f"alpha must exceed 1, got {alpha}")
    if not 0.0 <= right_share <= 1.0:
        raise JumpLawError(f"right_share must lie in [0, 1], got {right_share}")
    if not 1 <= min_jump <= max_jump:
        raise JumpLawError(f"need 1 <= min_jump <= max_jump, got {min_jump}, {max_jump}")

    sizes = np.arange(min_jump, max_jump + 1)
    weights = sizes.astype(float) ** (-alpha - 1.0)
    weights *= tail_mass / weights.sum()

    jumps: dict[int, float] = {}
    for y, p in base.items():
        jumps[int(y)] = jumps.get(int(y), 0.0) + float(p) * (1.0 - tail_mass)
    for s, w in zip(sizes.tolist(), weights.tolist()):
        if right_share > 0.0:
            jumps[s] = jumps.get(s, 0.0) + w * right_share
        if right_share < 1.0:
            jumps[-s] = jumps.get(-s, 0.0) + w * (1.0 - right_share)

    # renormalize away the rounding drift
    total = math.fsum(jumps.values())
    jumps = {y: p / total for y, p in jumps.items()}
    law = JumpLaw.from_mapping(jumps, tail_exponent=alpha, max_jump=max_jump)
    coeff = max(law.tail_mass(s) * s**alpha for s in range(1, law.max_offset + 1))
    return JumpLaw.from_mapping(jumps, tail_exponent=alpha, tail_coeff=coeff, max_jump=max_jump)


def law_from_spec(spec: Mapping[str, Any], default_max_jump: int = DEFAULT_MAX_JUMP) -> JumpLaw:
    """Parse one law entry of an environment spec."""
    max_jump = int(spec.get("max_jump", default_max_jump))
    if "power_tail" in spec:
        pt = spec["power_tail"]
        return power_tail_law(
            base=pt["base"],
            tail_mass=float(pt["tail_mass"]),
            alpha=float(pt["alpha"]),
            max_jump=int(pt.get("max_jump", max_jump)),
            min_jump=int(pt.get("min_jump", 2)),
            right_share=float(pt.get("right_share", 0.5)),
        )
    if "jumps" not in spec:
        # bare {offset: prob} mapping
        try:
            return JumpLaw.from_mapping(spec, max_jump=default_max_jump)
        except (TypeError, ValueError) as e:
            raise JumpLawError(f"law spec needs 'jumps' or 'power_tail', got keys {sorted(spec)} ({e})") from e
    return JumpLaw.from_mapping(
        spec["jumps"],
        tail_exponent=spec.get("tail_exponent"),
        tail_coeff=spec.get("tail_coeff"),
        max_jump=max_jump,
    )
