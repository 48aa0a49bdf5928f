# src/walklab/regen/estimators.py
"""Speed and environment-occupation estimators built on the walk and on regeneration cycles."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from walklab.env import Environment, as_rho, truncate
from walklab.models.occupation import EnvOccupation, occupation_from_counts
from walklab.regen.descriptors import check_descriptor_space, count_codes, decode, descriptor_codes
from walklab.regen.splitting import (
    RegenerationError,
    RegenRecord,
    SplitParams,
    choose_eps1,
    estimate_r_profile,
    merge_records,
    run_regen_replicas,
)
from walklab.stats import Estimate, ks_two_sample, mean_stderr, ratio_estimate
from walklab.utils.pool import get_default_threads, map_replicas
from walklab.utils.seeding import TAG_REPLICA, derive_seed
from walklab.walk import final_positions, run_walk

logger = logging.getLogger(__name__)

MIN_SPEED_CYCLES = 30
MIN_OCCUPATION_CYCLES = 100


def _as_record(record: RegenRecord | Sequence[RegenRecord]) -> RegenRecord:
    return record if isinstance(record, RegenRecord) else merge_records(list(record))


def speed_direct(
    env: Environment, rho, n_steps: int, n_replicas: int, seed: int, x0: int = 0, threads: int | None = None
) -> Estimate:
    """Mean of S_n / n over independent replicas, with the across-replica standard error."""
    if n_steps < 1 or n_replicas < 1:
        raise ValueError("n_steps and n_replicas must be positive")
    seeds = [derive_seed(seed, TAG_REPLICA, i) for i in range(n_replicas)]
    threads = threads or get_default_threads()
    chunks = [seeds[i::threads] for i in range(threads) if seeds[i::threads]]
    parts = map_replicas(lambda chunk: final_positions(env, rho, x0, n_steps, chunk)[0], chunks, threads)

    finals = np.empty(n_replicas, dtype=np.int64)
    for i, part in enumerate(parts):
        finals[i::threads] = part
    speeds = (finals - x0) / n_steps
    if n_replicas == 1:
        return Estimate(float(speeds[0]), math.inf, 1)
    return mean_stderr(speeds)


@dataclass(frozen=True)
class CycleSpeed:
    ratio: Estimate
    formula: Estimate
    mean_ell_gap: Estimate
    n_cycles: int

    def summary(self) -> dict[str, Any]:
        return {
            "v_ratio": self.ratio.summary(),
            "v_formula": self.formula.summary(),
            "mean_ell_gap": self.mean_ell_gap.summary(),
            "n_cycles": self.n_cycles,
        }


def speed_cycle(record: RegenRecord | Sequence[RegenRecord], split: SplitParams) -> CycleSpeed:
    """
    Two readings of the cycle speed formula.

    ``ratio``: rho E[ell gap] / E[T] as total displacement over total time.
    ``formula``: rho / (eps1 E[T]), using E[ell gap] = 1 / eps1.
    """
    rec = _as_record(record)
    if rec.n_cycles < MIN_SPEED_CYCLES:
        raise RegenerationError(f"speed_cycle needs at least {MIN_SPEED_CYCLES} cycles, got {rec.n_cycles}")
    durations = rec.durations()
    ratio = ratio_estimate(rec.displacements(), durations)
    mean_t = mean_stderr(durations)
    v = split.spacing / (split.eps1 * mean_t.value)
    formula = Estimate(v, v * mean_t.stderr / mean_t.value, mean_t.n)
    return CycleSpeed(ratio=ratio, formula=formula, mean_ell_gap=mean_stderr(rec.ell_gaps()), n_cycles=rec.n_cycles)


def _decoded(counts: dict[int, float], n_states: int, half_width: int) -> dict[tuple[int, ...], float]:
    return {decode(code, n_states, half_width): c for code, c in counts.items()}


def occupation_Q(record: RegenRecord | Sequence[RegenRecord], min_cycles: int = MIN_OCCUPATION_CYCLES) -> EnvOccupation:
    """Cycle average of the local descriptor at the walker: time at each descriptor over total cycle time."""
    rec = _as_record(record)
    if rec.n_cycles < min_cycles:
        raise RegenerationError(f"occupation_Q needs at least {min_cycles} cycles, got {rec.n_cycles}")
    totals: dict[int, int] = {}
    for c in rec.cycles:
        for code, n in c.occupation.items():
            totals[code] = totals.get(code, 0) + n
    counts = _decoded(totals, rec.n_states, rec.half_width)
    return occupation_from_counts(counts, source="cycles", n_cycles=rec.n_cycles, half_width=rec.half_width)


def occupation_direct(
    env: Environment,
    rho,
    n_steps: int,
    n_replicas: int,
    seed: int,
    half_width: int = 0,
    threads: int | None = None,
) -> EnvOccupation:
    """Long-run occupation of the descriptor at S_0..S_{n-1}, pooled over replicas (no cycles)."""
    check_descriptor_space(env, half_width)
    seeds = [derive_seed(seed, TAG_REPLICA, i) for i in range(n_replicas)]

    def one(s: int) -> dict[int, int]:
        run = run_walk(env, rho, 0, n_steps, s)
        return count_codes(descriptor_codes(env, run.positions[:-1], half_width))

    totals: dict[int, int] = {}
    for part in map_replicas(one, seeds, threads):
        for code, n in part.items():
            totals[code] = totals.get(code, 0) + n
    counts = _decoded(totals, env.n_states, half_width)
    return occupation_from_counts(counts, source="direct", n_steps=n_steps, n_replicas=n_replicas)


def env_marginal(env: Environment, half_width: int = 0) -> EnvOccupation:
    """Stationary law of the driver window of half-width ``half_width``."""
    check_descriptor_space(env, half_width)
    support = env.driver.window_support(half_width)
    weights = np.array([env.driver.window_probability(w) for w in support])
    return EnvOccupation(support=tuple(support), weights=weights / weights.sum(), meta={"source": "driver"})


@dataclass(frozen=True)
class RNDensity:
    ratios: dict[tuple[int, ...], float]
    inconsistent: list[tuple[int, ...]] = field(default_factory=list)
    zero_mass: list[tuple[int, ...]] = field(default_factory=list)

    @property
    def min_ratio(self) -> float:
        return min(self.ratios.values())

    @property
    def max_ratio(self) -> float:
        return max(self.ratios.values())

    @property
    def bounded(self) -> bool:
        return not self.inconsistent and not self.zero_mass and math.isfinite(self.max_ratio)

    def summary(self) -> dict[str, Any]:
        return {
            "ratios": {",".join(map(str, d)): r for d, r in sorted(self.ratios.items())},
            "min": self.min_ratio,
            "max": self.max_ratio,
            "inconsistent": [list(d) for d in self.inconsistent],
            "zero_mass": [list(d) for d in self.zero_mass],
            "bounded": self.bounded,
        }


def rn_density(occ: EnvOccupation, marginal: EnvOccupation) -> RNDensity:
    """Ratio Q_hat / P per descriptor; flags descriptors the driver never produces."""
    q, p = occ.as_dict(), marginal.as_dict()
    ratios: dict[tuple[int, ...], float] = {}
    inconsistent = []
    for d in sorted(set(q) | set(p)):
        pd, qd = p.get(d, 0.0), q.get(d, 0.0)
        if pd == 0.0:
            if qd > 0.0:
                inconsistent.append(d)
                ratios[d] = math.inf
            continue
        ratios[d] = qd / pd
    zero_mass = [d for d, r in ratios.items() if r == 0.0]
    return RNDensity(ratios=ratios, inconsistent=inconsistent, zero_mass=zero_mass)


def speed_from_occupation(occ: EnvOccupation, env: Environment, rho) -> float:
    """sum over descriptors of Q_hat(descriptor) * mean truncated step of the centre state."""
    level = as_rho(rho)
    drift = [truncate(law, level).mean() for law in env.laws]
    return float(sum(w * drift[d[len(d) // 2]] for d, w in occ.as_dict().items()))


def speed_vs_rho(
    env: Environment,
    rho_list: Sequence,
    n_steps: int,
    n_replicas: int,
    seed: int,
    threads: int | None = None,
) -> list[dict[str, Any]]:
    """v_hat for each rho on common random numbers; the list must increase and end with inf."""
    levels = [as_rho(r) for r in rho_list]
    if not levels or not levels[-1].is_infinite:
        raise ValueError("rho_list must end with inf")
    if any(b.rho <= a.rho for a, b in zip(levels, levels[1:])):
        raise ValueError(f"rho_list must be increasing, got {[str(r) for r in levels]}")
    rows = []
    for level in levels:
        est = speed_direct(env, level, n_steps, n_replicas, seed, threads=threads)
        rows.append({"rho": level.label(), "v": est.value, "stderr": est.stderr})
        logger.info(f"speed_vs_rho: rho={level} v={est.value:.5f} +- {est.stderr:.5f}")
    v_inf = rows[-1]["v"]
    for row in rows:
        row["gap_to_inf"] = abs(row["v"] - v_inf)
    return rows


def split_for(
    env: Environment, rho, levels: int, n_replicas: int, seed: int, threads: int | None = None
) -> SplitParams:
    """Estimate the r profile and pick eps1 in one go."""
    profile = estimate_r_profile(env, rho, levels, n_replicas, seed, threads=threads)
    period = env.n_states if env.is_periodic else None
    return choose_eps1(profile, period=period)


def cycle_duration_scaling(
    env: Environment,
    rho_list: Sequence[int],
    n_cycles: int,
    n_replicas: int,
    seed: int,
    levels: int = 8,
    profile_replicas: int = 2000,
    threads: int | None = None,
) -> dict[str, Any]:
    """
    Mean first-epoch time E T_{ell_1 rho} divided by rho for each rho, and the ratio
    of the largest to the smallest of these values.
    """
    runs = []
    for rho in rho_list:
        split = split_for(env, rho, levels, profile_replicas, seed, threads)
        runs.append((split, run_regen_replicas(env, split, n_cycles, n_replicas, seed, threads=threads)))
    return duration_scaling(runs)


def duration_scaling(runs: Sequence[tuple[SplitParams, Sequence[RegenRecord]]]) -> dict[str, Any]:
    """Duration table from already simulated (split, replica records) pairs, one pair per rho."""
    rows = []
    for split, records in runs:
        first = np.array([r.cycles[0].duration for r in records], dtype=float)
        est = mean_stderr(first)
        rows.append(
            {
                "rho": split.rho.label(),
                "eps1": split.eps1,
                "mean_T_over_rho": est.value / split.spacing,
                "stderr": est.stderr / split.spacing,
                "eps1_mean_T_over_rho": split.eps1 * est.value / split.spacing,
            }
        )
    values = [r["mean_T_over_rho"] for r in rows]
    return {"rows": rows, "bracket": [min(values), max(values)], "bracket_ratio": max(values) / min(values)}


def cycle_exchangeability(records: Sequence[RegenRecord], k: int = 10, level: float = 0.01) -> dict[str, Any]:
    """Two-sample KS of cycle 1 against cycle k, across runs, for displacement and for duration."""
    usable = [r for r in records if r.n_cycles >= k]
    if len(usable) < 2:
        raise RegenerationError(f"need at least 2 runs with {k} cycles, got {len(usable)}")
    first_d = [r.cycles[0].displacement for r in usable]
    kth_d = [r.cycles[k - 1].displacement for r in usable]
    first_t = [r.cycles[0].duration for r in usable]
    kth_t = [r.cycles[k - 1].duration for r in usable]
    displacement = ks_two_sample(first_d, kth_d, level)
    duration = ks_two_sample(first_t, kth_t, level)
    return {
        "k": k,
        "runs": len(usable),
        "displacement": displacement,
        "duration": duration,
        "passed": displacement["passed"] and duration["passed"],
    }
