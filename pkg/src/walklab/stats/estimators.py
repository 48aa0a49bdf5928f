# src/walklab/stats/estimators.py
"""Point estimates with standard errors, and the small statistical tests shared by the diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
from scipy import stats


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    n: int

    def ci(self, confidence: float = 0.99) -> tuple[float, float]:
        z = float(stats.norm.ppf(0.5 + confidence / 2.0))
        return self.value - z * self.stderr, self.value + z * self.stderr

    def excludes_zero(self, confidence: float = 0.99) -> bool:
        lo, hi = self.ci(confidence)
        return lo > 0.0 or hi < 0.0

    def summary(self) -> dict[str, Any]:
        return {"value": self.value, "stderr": self.stderr, "n": self.n}


def mean_stderr(samples: Sequence[float]) -> Estimate:
    x = np.asarray(samples, dtype=float)
    if len(x) == 0:
        raise ValueError("no samples")
    se = float(x.std(ddof=1) / math.sqrt(len(x))) if len(x) > 1 else math.inf
    return Estimate(float(x.mean()), se, len(x))


def proportion(successes: int, trials: int) -> Estimate:
    if trials <= 0:
        raise ValueError("no trials")
    p = successes / trials
    return Estimate(p, math.sqrt(max(p * (1.0 - p), 0.0) / trials), trials)


def ratio_estimate(numerators: Sequence[float], denominators: Sequence[float]) -> Estimate:
    """
    Regenerative ratio estimator sum(Y) / sum(T) over i.i.d. cycles.

    Standard error sqrt(sum((Y - v T)^2) / n) / mean(T) / sqrt(n).
    """
    y = np.asarray(numerators, dtype=float)
    t = np.asarray(denominators, dtype=float)
    n = len(y)
    if n == 0 or len(t) != n:
        raise ValueError("need equally many numerators and denominators")
    if t.sum() <= 0.0:
        raise ValueError("cycle lengths must have positive sum")
    v = float(y.sum() / t.sum())
    s = math.sqrt(float(np.sum((y - v * t) ** 2)) / n)
    return Estimate(v, s / (t.mean() * math.sqrt(n)), n)


def within_sigma(a: Estimate, b: Estimate, k: float = 3.0) -> bool:
    return abs(a.value - b.value) <= k * math.hypot(a.stderr, b.stderr)


def relative_difference(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0.0 else abs(a - b) / scale


def ks_two_sample(a: Sequence[float], b: Sequence[float], level: float = 0.01) -> dict[str, Any]:
    res = stats.ks_2samp(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    return {"statistic": float(res.statistic), "p_value": float(res.pvalue), "passed": bool(res.pvalue >= level)}


def ks_distance(samples: Sequence[float], cdf) -> float:
    """Sup distance between the empirical CDF of ``samples`` and ``cdf``."""
    return float(stats.kstest(np.asarray(samples, dtype=float), cdf).statistic)


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> Estimate:
    """Least-squares slope of log y against log x over the points with y > 0."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0)
    if keep.sum() < 3:
        raise ValueError("need at least 3 positive points for a log-log fit")
    res = stats.linregress(np.log(x[keep]), np.log(y[keep]))
    return Estimate(float(res.slope), float(res.stderr), int(keep.sum()))


def tail_survival(values: Sequence[float], thresholds: Sequence[float]) -> np.ndarray:
    """Empirical P[|value| > h] for each threshold h."""
    v = np.abs(np.asarray(values, dtype=float))
    return np.array([float(np.mean(v > h)) for h in thresholds])


def fit_tail_exponent(values: Sequence[float], h_min: float, h_max: float, n_points: int = 12) -> dict[str, Any]:
    """
    Fit P[|value| > h] ~ C h^-a by log-log regression on a geometric grid of h in
    [h_min, h_max]; returns the exponent a with its standard error and the fitted C.
    """
    grid = np.geomspace(h_min, h_max, n_points)
    surv = tail_survival(values, grid)
    slope = loglog_slope(grid, surv)
    keep = surv > 0
    coeff = float(np.max(surv[keep] * grid[keep] ** (-slope.value))) if keep.any() else math.nan
    return {
        "exponent": -slope.value,
        "stderr": slope.stderr,
        "points": slope.n,
        "coeff": coeff,
        "grid": grid.tolist(),
        "survival": surv.tolist(),
    }
