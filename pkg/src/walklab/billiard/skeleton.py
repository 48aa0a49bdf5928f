# src/walklab/billiard/skeleton.py
"""
Integer skeleton of a billiard trajectory.

The trajectory is subsampled at J(n) = eta_1 + ... + eta_n with eta uniform on
{1..N}, thinned by an independent Bernoulli(r1) sequence zeta' whose successes are
kappa_1 < kappa_2 < ..., and read every L^4 successes:

    S_m = floor(xi_{J(kappa_{L^4 m})} . e),   kappa_0 = 0.

eta and zeta' are drawn independently of the path, so S is a diagnostic of the
lumped walk (increment tails, speed, one-step Markov property), not an exact sample of
the coupled chain.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
from scipy import stats

from walklab.billiard.kernel import BilliardParams
from walklab.billiard.run import BilliardRun
from walklab.stats import fit_tail_exponent
from walklab.utils.seeding import TAG_SKELETON, derive_seed, make_rng

logger = logging.getLogger(__name__)


class SkeletonError(ValueError):
    pass


@dataclass(frozen=True)
class Skeleton:
    times: np.ndarray
    values: np.ndarray
    params: BilliardParams

    @property
    def n_points(self) -> int:
        return len(self.values)

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values)

    @property
    def mean_gap(self) -> float:
        """Mean number of billiard steps between skeleton points."""
        return float(np.diff(self.times).mean())

    def speed(self) -> float:
        """Axial speed per billiard step read off the skeleton."""
        return float(self.values[-1] - self.values[0]) / float(self.times[-1] - self.times[0])


def extract_skeleton(run: BilliardRun, params: BilliardParams, seed: int) -> Skeleton:
    n = run.n_steps
    rng = make_rng(derive_seed(seed, TAG_SKELETON))
    eta = rng.integers(1, params.N_skeleton + 1, size=n + 1)
    zeta = rng.random(n + 1) < params.r1
    J = np.concatenate(([0], np.cumsum(eta)))
    kappa = np.concatenate(([0], 1 + np.flatnonzero(zeta)))
    stride = params.L**4
    picks = kappa[::stride]
    times = J[picks]
    times = times[times <= n]
    if len(times) < 2:
        raise SkeletonError(f"run of {n} steps too short for a skeleton with stride L^4={stride}, r1={params.r1}")
    values = np.floor(run.alphas[times]).astype(np.int64)
    logger.debug(f"skeleton: {len(times)} points from {n} steps")
    return Skeleton(times=times, values=values, params=params)


def skeleton_tail(skel: Skeleton | Sequence[Skeleton], h_min: float = 2.0, h_max: float = 20.0) -> dict[str, Any]:
    """Tail exponent of the increments pooled over skeletons, centred at their median."""
    skels = [skel] if isinstance(skel, Skeleton) else list(skel)
    if not skels:
        raise SkeletonError("no skeletons")
    inc = np.concatenate([s.increments for s in skels]).astype(float)
    return fit_tail_exponent(inc - np.median(inc), h_min, h_max)


def skeleton_transition_counts(skel: Skeleton) -> dict[int, float]:
    """Empirical one-step law of S_{m+1} - S_m (the lumped kernel by relative offset)."""
    counts = Counter(skel.increments.tolist())
    total = sum(counts.values())
    return {int(k): c / total for k, c in sorted(counts.items())}


def skeleton_markov_test(skel: Skeleton, n_bins: int = 3, level: float = 0.01) -> dict[str, Any]:
    """Chi-square independence of consecutive increments, binned at empirical quantiles."""
    inc = skel.increments.astype(float)
    if len(inc) < 20:
        raise SkeletonError(f"need at least 20 increments, got {len(inc)}")
    edges = np.unique(np.quantile(inc, np.linspace(0.0, 1.0, n_bins + 1)[1:-1]))
    codes = np.searchsorted(edges, inc, side="right")
    k = len(edges) + 1
    table = np.zeros((k, k), dtype=np.int64)
    np.add.at(table, (codes[:-1], codes[1:]), 1)
    table = table[table.sum(axis=1) > 0][:, table.sum(axis=0) > 0]
    if min(table.shape) < 2:
        return {"statistic": 0.0, "p_value": 1.0, "dof": 0, "passed": True, "table": table.tolist()}
    chi2, p, dof, _ = stats.chi2_contingency(table)
    return {"statistic": float(chi2), "p_value": float(p), "dof": int(dof), "passed": bool(p >= level), "table": table.tolist()}


def skeleton_summary(skel: Skeleton) -> dict[str, Any]:
    inc = skel.increments
    return {
        "points": skel.n_points,
        "mean_gap": skel.mean_gap,
        "speed": skel.speed(),
        "mean_increment": float(inc.mean()) if len(inc) else math.nan,
    }
