# src/walklab/regen/splitting.py
"""
Regeneration by splitting the ladder hits.

The walk is cut into segments: segment j runs from the first time the walk is at or
beyond (j-1) rho to the first time it is at or beyond j rho. A Bernoulli(eps1) coin
zeta_j is attached to every segment. With zeta_j = 1 the segment is resampled until
it lands exactly on j rho; with zeta_j = 0 an exact landing is thrown away with
probability eps1 / r_hat(j), so the two branches mix back to the plain walk up to the
error of r_hat. Levels j with zeta_j = 1 are the regeneration levels ell_k, and the
times T_{ell_k rho} cut the path into cycles.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from walklab.env import Environment, TruncationLevel, as_rho
from walklab.regen.descriptors import check_descriptor_space, count_codes, descriptor_codes
from walklab.utils.invariants import require
from walklab.utils.pool import map_replicas
from walklab.utils.seeding import TAG_REPLICA, TAG_WALK, TAG_ZETA, derive_seed, make_rng
from walklab.walk import StepKernel

logger = logging.getLogger(__name__)

SEGMENT_STEP_CAP = 1_000_000
EPS1_FLOOR = 1e-4
DEGENERATE_R = 1e-3
UNIFORM_BUFFER = 4096
MIN_BUDGET = 50


class RegenerationError(RuntimeError):
    pass


class DegenerateProfileError(RegenerationError):
    pass


class _SegmentWalker:
    """Walks one ladder segment at a time from a single uniform stream."""

    def __init__(self, env: Environment, level: TruncationLevel, seed: int, step_cap: int) -> None:
        self.kernel = StepKernel(env, level)
        self.rng = make_rng(seed)
        self.step_cap = step_cap
        self._buf: list[float] = []
        self._i = 0

    def segment(self, x: int, z: int) -> list[int]:
        """Positions from ``x`` (included) until the first one >= ``z`` (included)."""
        path = [x]
        step_one = self.kernel.step_one
        for _ in range(self.step_cap):
            if x >= z:
                return path
            if self._i == len(self._buf):
                self._buf = self.rng.random(UNIFORM_BUFFER).tolist()
                self._i = 0
            x, _ = step_one(x, self._buf[self._i])
            self._i += 1
            path.append(x)
        if x >= z:
            return path
        raise RegenerationError(
            f"segment to level {z} did not finish within {self.step_cap} steps; "
            f"review Conditions E, C and D for this environment"
        )


def ladder_spacing(env: Environment, rho) -> int:
    """Level spacing of the regeneration ladder: rho itself when finite, a stand-in for rho = inf."""
    level = as_rho(rho)
    return level.effective(env.max_offset) if level.is_infinite else int(level.rho)


@dataclass(frozen=True)
class RProfile:
    rho: TruncationLevel
    spacing: int
    estimates: dict[int, tuple[float, float]]
    n_replicas: int

    @property
    def min_r(self) -> float:
        return min(r for r, _ in self.estimates.values())

    def degenerate_levels(self) -> list[int]:
        return [j for j, (r, se) in self.estimates.items() if r < DEGENERATE_R or r - 2.0 * se <= 0.0]

    def summary(self) -> dict[str, Any]:
        return {
            "rho": self.rho.label(),
            "spacing": self.spacing,
            "n_replicas": self.n_replicas,
            "levels": {str(j): {"r_hat": r, "stderr": se} for j, (r, se) in sorted(self.estimates.items())},
        }


def _ladder_hits(env: Environment, level: TruncationLevel, spacing: int, top: int, seed: int, step_cap: int) -> list[bool]:
    walker = _SegmentWalker(env, level, seed, step_cap)
    x, exact = 0, []
    for j in range(1, top + 1):
        x = walker.segment(x, j * spacing)[-1]
        exact.append(x == j * spacing)
    return exact


def estimate_r_profile(
    env: Environment,
    rho,
    levels: int | Sequence[int],
    n_replicas: int,
    seed: int,
    strict: bool = True,
    step_cap: int = SEGMENT_STEP_CAP,
    threads: int | None = None,
) -> RProfile:
    """
    r_hat(j): frequency with which the walk from 0 lands exactly on j rho the first
    time it reaches j rho, for each requested ladder level j.

    ``levels`` is a count L (levels 1..L) or an explicit list. In strict mode a level
    with r_hat indistinguishable from 0 raises ``DegenerateProfileError``.
    """
    level = as_rho(rho)
    wanted = list(range(1, levels + 1)) if isinstance(levels, int) else sorted(int(j) for j in levels)
    if not wanted or wanted[0] < 1:
        raise ValueError(f"levels must be positive, got {levels}")
    if n_replicas < 2:
        raise ValueError(f"need at least 2 replicas, got {n_replicas}")
    spacing = ladder_spacing(env, level)
    top = wanted[-1]

    seeds = [derive_seed(seed, TAG_REPLICA, i) for i in range(n_replicas)]
    hits = np.array(map_replicas(lambda s: _ladder_hits(env, level, spacing, top, s, step_cap), seeds, threads))

    estimates = {}
    for j in wanted:
        col = hits[:, j - 1].astype(float)
        r = float(col.mean())
        estimates[j] = (r, float(math.sqrt(max(r * (1.0 - r), 0.0) / n_replicas)))
    profile = RProfile(rho=level, spacing=spacing, estimates=estimates, n_replicas=n_replicas)

    bad = profile.degenerate_levels()
    if bad:
        msg = (
            f"exact-hit probability indistinguishable from 0 at levels {bad} (rho={level}); "
            f"check Condition E (P[+1] bounded below), Condition C (tails) and Condition D (transience)"
        )
        if strict:
            raise DegenerateProfileError(msg)
        logger.warning(msg)
    return profile


@dataclass(frozen=True)
class SplitParams:
    eps1: float
    rho: TruncationLevel
    r_estimates: dict[int, tuple[float, float]]
    spacing: int
    period: int | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.eps1 < 1.0:
            raise ValueError(f"eps1 must lie in (0, 1), got {self.eps1}")
        if not self.r_estimates:
            raise ValueError("no r estimates")
        min_r = min(r for r, _ in self.r_estimates.values())
        if self.eps1 > min_r / 2.0 + 1e-15:
            raise ValueError(f"eps1={self.eps1} exceeds min r_hat / 2 = {min_r / 2.0}")

    def r_for_level(self, j: int) -> float:
        """r_hat at level j; beyond the estimated ladder the pooled mean (same residue class for periodic drivers)."""
        if j in self.r_estimates:
            return self.r_estimates[j][0]
        pool = list(self.r_estimates.items())
        if self.period:
            same = [(k, v) for k, v in pool if (k * self.spacing) % self.period == (j * self.spacing) % self.period]
            pool = same or pool
        return float(np.mean([v[0] for _, v in pool]))

    @property
    def bias_bound(self) -> float:
        """max stderr(r_hat) / r_hat over the estimated levels."""
        return max((se / r if r > 0 else math.inf) for r, se in self.r_estimates.values())

    def summary(self) -> dict[str, Any]:
        return {
            "eps1": self.eps1,
            "rho": self.rho.label(),
            "spacing": self.spacing,
            "levels_scanned": sorted(self.r_estimates),
            "bias_bound": self.bias_bound,
            "note": "eps1 is taken over the scanned ladder levels only",
        }


def choose_eps1(
    profile: RProfile | dict, rho=None, spacing: int | None = None, period: int | None = None
) -> SplitParams:
    """eps1 = min over levels of (r_hat - 2 stderr) / 2, floored at 1e-4 and never above min r_hat / 2."""
    if isinstance(profile, RProfile):
        estimates, level, spacing = profile.estimates, profile.rho, profile.spacing
    else:
        estimates = {int(j): (float(v[0]), float(v[1])) for j, v in profile.items()}
        level = as_rho(rho)
        if spacing is None:
            if level.is_infinite:
                raise ValueError("pass the ladder spacing when rho is infinite")
            spacing = int(level.rho)
    if not estimates:
        raise ValueError("empty r profile")
    min_r = min(r for r, _ in estimates.values())
    if min_r <= 0.0:
        raise DegenerateProfileError("r_hat = 0 at some level; no splitting possible")

    eps1 = 0.5 * min(r - 2.0 * se for r, se in estimates.values())
    if eps1 < EPS1_FLOOR:
        logger.warning(f"eps1 floored at {EPS1_FLOOR}; regeneration will be slow")
        eps1 = EPS1_FLOOR
    eps1 = min(eps1, min_r / 2.0)
    return SplitParams(eps1=eps1, rho=level, r_estimates=dict(estimates), spacing=spacing, period=period)


@dataclass
class Cycle:
    ell: int
    start_time: int
    end_time: int
    displacement: int
    occupation: dict[int, int] = field(default_factory=dict)

    @property
    def duration(self) -> int:
        return self.end_time - self.start_time


@dataclass
class RegenRecord:
    rho: TruncationLevel
    spacing: int
    eps1: float
    seed: int
    half_width: int
    n_states: int
    ell: list[int] = field(default_factory=list)
    epoch_times: list[int] = field(default_factory=list)
    zeta: list[int] = field(default_factory=list)
    cycles: list[Cycle] = field(default_factory=list)
    resamples: int = 0
    n_runs: int = 1

    @property
    def n_cycles(self) -> int:
        return len(self.cycles)

    def durations(self) -> np.ndarray:
        return np.array([c.duration for c in self.cycles], dtype=float)

    def displacements(self) -> np.ndarray:
        return np.array([c.displacement for c in self.cycles], dtype=float)

    def ell_gaps(self) -> np.ndarray:
        return np.array([c.displacement // self.spacing for c in self.cycles], dtype=float)

    def cycle_rows(self) -> Iterable[tuple]:
        for k, c in enumerate(self.cycles, start=1):
            yield k, c.ell, c.start_time, c.end_time, c.duration, c.displacement

    def summary(self) -> dict[str, Any]:
        d = self.durations()
        return {
            "rho": self.rho.label(),
            "spacing": self.spacing,
            "eps1": self.eps1,
            "n_runs": self.n_runs,
            "n_cycles": self.n_cycles,
            "mean_duration": float(d.mean()) if len(d) else None,
            "mean_ell_gap": float(self.ell_gaps().mean()) if len(d) else None,
            "resamples": self.resamples,
        }


def run_with_splitting(
    env: Environment,
    split: SplitParams,
    n_cycles: int,
    seed: int,
    half_width: int = 0,
    step_cap: int = SEGMENT_STEP_CAP,
) -> RegenRecord:
    """Simulate segment by segment until ``n_cycles`` regeneration cycles are complete."""
    if n_cycles < 1:
        raise ValueError(f"n_cycles must be >= 1, got {n_cycles}")
    check_descriptor_space(env, half_width)
    level, spacing, eps1 = split.rho, split.spacing, split.eps1
    walker = _SegmentWalker(env, level, derive_seed(seed, TAG_WALK), step_cap)
    coins = make_rng(derive_seed(seed, TAG_ZETA))
    budget = max(math.ceil(10.0 / eps1), MIN_BUDGET)

    record = RegenRecord(
        rho=level, spacing=spacing, eps1=eps1, seed=int(seed), half_width=half_width, n_states=env.n_states
    )
    x, t, j = 0, 0, 0
    cycle_start_time, cycle_start_pos = 0, 0
    occupation: dict[int, int] = {}

    while record.n_cycles < n_cycles:
        j += 1
        z = j * spacing
        zeta = bool(coins.random() < eps1)
        r_hat = split.r_for_level(j)
        attempts = 0
        while True:
            path = walker.segment(x, z)
            exact = path[-1] == z
            if zeta and exact:
                break
            if not zeta and (not exact or coins.random() >= eps1 / r_hat):
                break
            attempts += 1
            if attempts > budget:
                raise RegenerationError(
                    f"rejection budget {budget} exceeded at level {j} (zeta={int(zeta)}, r_hat={r_hat:.4f})"
                )
        record.resamples += attempts
        record.zeta.append(int(zeta))

        codes = descriptor_codes(env, np.asarray(path[:-1], dtype=np.int64), half_width)
        for code, c in count_codes(codes).items():
            occupation[code] = occupation.get(code, 0) + c
        t += len(path) - 1
        x = path[-1]

        if zeta:
            require(x == z, "regeneration_anchor", f"epoch at level {j} landed on {x}, not {z}")
            record.ell.append(j)
            record.epoch_times.append(t)
            record.cycles.append(
                Cycle(
                    ell=j,
                    start_time=cycle_start_time,
                    end_time=t,
                    displacement=z - cycle_start_pos,
                    occupation=occupation,
                )
            )
            cycle_start_time, cycle_start_pos = t, z
            occupation = {}

    logger.debug(f"Splitting run seed={seed}: {n_cycles} cycles over {j} segments, {record.resamples} resamples")
    return record


def run_regen_replicas(
    env: Environment,
    split: SplitParams,
    n_cycles: int,
    n_replicas: int,
    seed: int,
    half_width: int = 0,
    threads: int | None = None,
) -> list[RegenRecord]:
    seeds = [derive_seed(seed, TAG_REPLICA, i) for i in range(n_replicas)]
    return map_replicas(lambda s: run_with_splitting(env, split, n_cycles, s, half_width), seeds, threads)


def merge_records(records: Sequence[RegenRecord]) -> RegenRecord:
    """Concatenate replica records (associative; order only affects list order)."""
    if not records:
        raise ValueError("nothing to merge")
    first = records[0]
    for r in records[1:]:
        if (r.rho, r.spacing, r.eps1, r.half_width) != (first.rho, first.spacing, first.eps1, first.half_width):
            raise ValueError("records come from different splitting parameters")
    merged = RegenRecord(
        rho=first.rho,
        spacing=first.spacing,
        eps1=first.eps1,
        seed=first.seed,
        half_width=first.half_width,
        n_states=first.n_states,
    )
    for r in records:
        merged.ell.extend(r.ell)
        merged.epoch_times.extend(r.epoch_times)
        merged.zeta.extend(r.zeta)
        merged.cycles.extend(r.cycles)
        merged.resamples += r.resamples
    merged.n_runs = sum(r.n_runs for r in records)
    return merged
