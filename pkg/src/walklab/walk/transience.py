# src/walklab/walk/transience.py
"""Condition D diagnostics and the one-step law check."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import stats

from walklab.env import INFINITY, Environment, TruncationLevel, as_rho, truncate
from walklab.utils.pool import map_replicas
from walklab.utils.seeding import TAG_REPLICA, derive_seed, make_rng
from walklab.walk.walker import BLOCK, StepKernel

logger = logging.getLogger(__name__)

MAX_BACKTRACK = 0.05


class ConditionDError(RuntimeError):
    pass


@dataclass
class ConditionDEstimate:
    rho: TruncationLevel
    depth: int
    barrier: int
    n_replicas: int
    g_hat: np.ndarray
    stderr: np.ndarray
    backtrack_fraction: float
    mean_steps: float
    monotone: bool = True
    extras: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.monotone and self.backtrack_fraction <= MAX_BACKTRACK

    def summary(self) -> dict[str, Any]:
        return {
            "rho": self.rho.label(),
            "depth": self.depth,
            "barrier": self.barrier,
            "n_replicas": self.n_replicas,
            "g_hat": self.g_hat.tolist(),
            "stderr": self.stderr.tolist(),
            "backtrack_fraction": self.backtrack_fraction,
            "mean_steps": self.mean_steps,
            "monotone": self.monotone,
            "passed": self.passed,
        }


def default_barrier(env: Environment, rho) -> int:
    return 10 * as_rho(rho).effective(env.max_offset) + 50


def _visits_one(
    env: Environment, rho, depth: int, barrier: int, seed: int, step_cap: int
) -> tuple[np.ndarray, bool, int]:
    """
    Visits to 0, -1, .., -depth from start 0 until the walk first reaches 2*barrier.

    Returns the visit counts, whether the walk came back to the test window after
    first passing ``barrier``, and the number of steps used.
    """
    kernel = StepKernel(env, rho)
    rng = make_rng(seed)
    step_one = kernel.step_one
    counts = np.zeros(depth + 1, dtype=np.int64)
    x, steps = 0, 0
    passed_barrier = backtracked = False
    counts[0] = 1

    while steps < step_cap:
        b = min(BLOCK, step_cap - steps)
        for u in rng.random(b).tolist():
            x, _ = step_one(x, u)
            steps += 1
            if -depth <= x <= 0:
                counts[-x] += 1
                if passed_barrier:
                    backtracked = True
            if x >= barrier:
                passed_barrier = True
                if x >= 2 * barrier:
                    return counts, backtracked, steps
    raise ConditionDError(
        f"walk did not clear barrier {2 * barrier} within {step_cap} steps "
        f"(rho={as_rho(rho)}); Condition D is likely violated for this environment"
    )


def estimate_condition_D(
    env: Environment,
    rho,
    depth: int,
    n_replicas: int,
    seed: int,
    barrier: int | None = None,
    step_cap: int | None = None,
    threads: int | None = None,
) -> ConditionDEstimate:
    """
    g_hat(k): mean number of visits to site -k, starting from 0, before the walk
    leaves for good.

    "For good" means first reaching ``2 * barrier``; the fraction of replicas that
    returned to the test window after passing ``barrier`` is reported as the
    residual bias indicator.
    """
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    if n_replicas < 2:
        raise ValueError(f"need at least 2 replicas, got {n_replicas}")
    level = as_rho(rho)
    barrier = barrier or default_barrier(env, level)
    step_cap = step_cap or max(100_000, 1000 * barrier)

    seeds = [derive_seed(seed, TAG_REPLICA, i) for i in range(n_replicas)]
    results = map_replicas(lambda s: _visits_one(env, level, depth, barrier, s, step_cap), seeds, threads)

    counts = np.stack([r[0] for r in results]).astype(float)
    g_hat = counts.mean(axis=0)
    stderr = counts.std(axis=0, ddof=1) / math.sqrt(n_replicas)
    backtrack = float(np.mean([r[1] for r in results]))
    mean_steps = float(np.mean([r[2] for r in results]))

    slack = 3.0 * np.sqrt(stderr[1:] ** 2 + stderr[:-1] ** 2)
    monotone = bool(np.all(g_hat[1:] <= g_hat[:-1] + slack))

    est = ConditionDEstimate(
        rho=level,
        depth=depth,
        barrier=barrier,
        n_replicas=n_replicas,
        g_hat=g_hat,
        stderr=stderr,
        backtrack_fraction=backtrack,
        mean_steps=mean_steps,
        monotone=monotone,
    )
    logger.info(
        f"Condition D at rho={level}: g_hat(0)={g_hat[0]:.4f}, backtrack={backtrack:.4f}, passed={est.passed}"
    )
    return est


def condition_D_scan(
    env: Environment, rho0: int, depth: int, n_replicas: int, seed: int, threads: int | None = None
) -> list[dict[str, Any]]:
    """
    Try rho in {rho0, 2 rho0, 4 rho0, inf} with common random numbers.

    Only finitely many rho are tried; nothing is claimed about a uniform bound.
    """
    rows = []
    for level in (as_rho(rho0), as_rho(2 * rho0), as_rho(4 * rho0), INFINITY):
        try:
            est = estimate_condition_D(env, level, depth, n_replicas, seed, threads=threads)
            rows.append(est.summary())
        except ConditionDError as e:
            logger.warning(f"Condition D scan: rho={level} failed: {e}")
            rows.append({"rho": level.label(), "passed": False, "error": str(e)})
    return rows


def choose_rho0(
    env: Environment, depth: int, n_replicas: int, seed: int, start: int = 4, threads: int | None = None
) -> TruncationLevel:
    """Smallest rho in start, 2 start, 4 start, .., inf whose Condition D diagnostic passes."""
    rho = start
    candidates = []
    while rho <= env.max_offset:
        candidates.append(as_rho(rho))
        rho *= 2
    candidates.append(INFINITY)

    for level in candidates:
        try:
            if estimate_condition_D(env, level, depth, n_replicas, seed, threads=threads).passed:
                return level
        except ConditionDError as e:
            logger.debug(f"rho={level} rejected: {e}")
    raise ConditionDError(f"no rho in {[str(c) for c in candidates]} passes the Condition D diagnostic")


def one_step_chi_square(
    env: Environment, rho, site: int, n_steps: int = 100_000, seed: int = 0, level: float = 0.01
) -> dict[str, Any]:
    """
    Draw ``n_steps`` single steps from a walker pinned at ``site`` and compare the
    displacements with the truncated site law (chi-square, bins with expected count
    below 5 pooled).
    """
    kernel = StepKernel(env, rho)
    rng = make_rng(seed)
    state = kernel.state(int(site))
    moves, _ = kernel.moves(np.full(n_steps, state, dtype=np.int64), rng.random(n_steps))

    law = truncate(env.laws[state], kernel.level)
    support = set(law.offsets)
    stray = sorted(set(np.unique(moves).tolist()) - support)
    if stray:
        return {"site": int(site), "passed": False, "stray_offsets": stray}

    expected = np.asarray(law.probs) * n_steps
    observed = np.array([int(np.count_nonzero(moves == y)) for y in law.offsets], dtype=float)
    small = expected < 5.0
    if small.any() and (~small).sum() >= 1:
        expected = np.append(expected[~small], expected[small].sum())
        observed = np.append(observed[~small], observed[small].sum())
        if expected[-1] == 0.0:
            expected, observed = expected[:-1], observed[:-1]
    if len(expected) < 2:
        return {"site": int(site), "passed": True, "statistic": 0.0, "p_value": 1.0, "bins": len(expected)}

    statistic, p_value = stats.chisquare(observed, expected * observed.sum() / expected.sum())
    return {
        "site": int(site),
        "passed": bool(p_value >= level),
        "statistic": float(statistic),
        "p_value": float(p_value),
        "bins": len(expected),
    }
