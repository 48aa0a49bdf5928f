# src/walklab/billiard/diagnostics.py
"""
Structural checks of the billiard: reversibility of the e^{lam alpha}-weighted surface
measure, hitting bounds from weighted starts, exit-time and backtrack tails, chord tails.
"""

from __future__ import annotations

import logging
import math
from typing import Any, Iterable, Sequence, Union

import numpy as np
from scipy import stats

from walklab.billiard.kernel import BilliardParams, cylinder_block, propose, step
from walklab.billiard.run import BilliardRun, run_billiard
from walklab.stats import fit_tail_exponent, proportion
from walklab.tube import BoundaryPoint, Tube, pi_measure, sample_boundary_uniform
from walklab.utils.pool import map_replicas
from walklab.utils.seeding import TAG_BILLIARD, TAG_REPLICA, derive_seed, make_rng

logger = logging.getLogger(__name__)

Bands = Union[int, Sequence[int]]

MAX_START_TRIES = 10_000


class BandError(ValueError):
    pass


def _bands(B: Bands) -> tuple[int, ...]:
    bands = (int(B),) if isinstance(B, (int, np.integer)) else tuple(sorted(set(int(j) for j in B)))
    if not bands:
        raise BandError("empty band set")
    return bands


def pi_mass(tube: Tube, B: Bands, lam: float) -> float:
    return math.fsum(pi_measure(tube, j, lam) for j in _bands(B))


def sample_weighted_start(tube: Tube, B: Bands, lam: float, rng: np.random.Generator) -> BoundaryPoint:
    """
    Draw from e^{lam alpha} surface measure restricted to the bands B: a band in proportion
    to its weighted mass, then a surface-uniform point accepted with e^{lam (alpha - (j+1))}.
    """
    bands = _bands(B)
    masses = np.array([pi_measure(tube, j, lam) for j in bands])
    if not np.all(masses > 0.0):
        raise BandError(f"bands {bands} include one with zero measure")
    k = int(np.searchsorted(np.cumsum(masses) / masses.sum(), rng.random(), side="right"))
    j = bands[min(k, len(bands) - 1)]
    for _ in range(MAX_START_TRIES):
        p = sample_boundary_uniform(tube, j, rng)
        if rng.random() < math.exp(lam * (p.alpha - (j + 1))):
            return p
    raise BandError(f"weighted start on band {j} not accepted after {MAX_START_TRIES} tries")


def _one_step_into(tube: Tube, params: BilliardParams, B: tuple[int, ...], F: tuple[int, ...], n: int, seed: int) -> int:
    rng = make_rng(seed)
    resample_rng = make_rng(derive_seed(seed, TAG_BILLIARD, 1))
    targets = set(F)
    hits = 0
    for _ in range(n):
        x = sample_weighted_start(tube, B, params.lam, rng)
        y, _ = step(tube, params, x, rng, resample_rng)
        hits += y.band in targets
    return hits


def _chunked(total: int, seed: int, chunks: int) -> list[tuple[int, int]]:
    sizes = [total // chunks + (1 if i < total % chunks else 0) for i in range(chunks)]
    return [(size, derive_seed(seed, TAG_REPLICA, i)) for i, size in enumerate(sizes) if size]


def detailed_balance_test(
    tube: Tube,
    params: BilliardParams,
    B1: Bands,
    B2: Bands,
    n_samples: int,
    seed: int,
    chunks: int = 8,
    threads: int | None = None,
) -> dict[str, Any]:
    """
    Compare the one-step fluxes pi(B1) P^{B1}[xi_1 in B2] and pi(B2) P^{B2}[xi_1 in B1]
    from weighted starts; they agree when the weighted measure is reversible.
    """
    b1, b2 = _bands(B1), _bands(B2)
    if set(b1) & set(b2) and b1 != b2:
        raise BandError(f"band sets {b1} and {b2} overlap")

    def side(B, F, tag):
        jobs = _chunked(n_samples, derive_seed(seed, TAG_BILLIARD, tag), chunks)
        hits = sum(map_replicas(lambda job: _one_step_into(tube, params, B, F, job[0], job[1]), jobs, threads))
        p = proportion(hits, n_samples)
        mass = pi_mass(tube, B, params.lam)
        return mass * p.value, mass * p.stderr, p

    flux1, sigma1, p1 = side(b1, b2, 11)
    if b1 == b2:
        flux2, sigma2, p2 = flux1, sigma1, p1
    else:
        flux2, sigma2, p2 = side(b2, b1, 12)
    diff = flux1 - flux2
    sigma = math.hypot(sigma1, sigma2)
    scale = max(abs(flux1), abs(flux2))
    report = {
        "B1": list(b1),
        "B2": list(b2),
        "lambda": params.lam,
        "pi_B1": pi_mass(tube, b1, params.lam),
        "pi_B2": pi_mass(tube, b2, params.lam),
        "p_12": p1.summary(),
        "p_21": p2.summary(),
        "flux_12": flux1,
        "flux_21": flux2,
        "difference": diff,
        "sigma": sigma,
        "relative_difference": abs(diff) / scale if scale > 0.0 else 0.0,
        "z": diff / sigma if sigma > 0.0 else 0.0,
        "passed": abs(diff) <= 3.0 * sigma,
    }
    logger.info(f"detailed balance {b1}<->{b2} lam={params.lam}: z={report['z']:.2f}")
    return report


def hitting_bound_test(
    tube: Tube,
    params: BilliardParams,
    B: Bands,
    F: Bands,
    m: int,
    n_samples: int,
    seed: int,
    threads: int | None = None,
) -> dict[str, Any]:
    """P^B[xi_k in F for some k <= m] against the stationary bound m pi(F) / pi(B)."""
    b, f = _bands(B), _bands(F)
    targets = set(f)

    def job(args: tuple[int, int]) -> int:
        n, s = args
        rng = make_rng(s)
        resample_rng = make_rng(derive_seed(s, TAG_BILLIARD, 1))
        hits = 0
        for _ in range(n):
            x = sample_weighted_start(tube, b, params.lam, rng)
            for _ in range(m):
                x, _ = step(tube, params, x, rng, resample_rng)
                if x.band in targets:
                    hits += 1
                    break
        return hits

    hits = sum(map_replicas(job, _chunked(n_samples, seed, 8), threads))
    p = proportion(hits, n_samples)
    bound = m * pi_mass(tube, f, params.lam) / pi_mass(tube, b, params.lam)
    return {
        "B": list(b),
        "F": list(f),
        "m": m,
        "probability": p.summary(),
        "bound": bound,
        "passed": p.value - 3.0 * p.stderr <= bound,
    }


def exit_time_tail(
    tube: Tube,
    params: BilliardParams,
    a: float,
    b: float,
    start: BoundaryPoint | None,
    n_replicas: int,
    seed: int,
    t_max: int = 5,
    threads: int | None = None,
) -> dict[str, Any]:
    """
    Survival P[tau > (b-a)^3 t] for t = 1..t_max, tau the first step with xi.e outside [a, b].

    ``start=None`` draws a surface-uniform start in the band containing (a+b)/2 per replica.
    """
    if b - a < 1.0:
        raise ValueError(f"need b - a >= 1, got {b - a}")
    scale = (b - a) ** 3
    horizon = int(math.ceil(scale * t_max)) + 1

    def one(s: int) -> int:
        x0 = start
        if x0 is None:
            x0 = sample_boundary_uniform(tube, math.ceil((a + b) / 2) - 1, derive_seed(s, TAG_BILLIARD, 2))
        if not a <= x0.alpha <= b:
            return 0
        run = run_billiard(tube, params, x0, horizon, s)
        outside = np.flatnonzero((run.alphas < a) | (run.alphas > b))
        return int(outside[0]) if len(outside) else horizon + 1

    taus = np.array(map_replicas(one, [derive_seed(seed, TAG_REPLICA, i) for i in range(n_replicas)], threads))
    ts = list(range(1, t_max + 1))
    survival = [float(np.mean(taus > scale * t)) for t in ts]
    ratios = [s2 / s1 if s1 > 0 else math.nan for s1, s2 in zip(survival, survival[1:])]
    finite = [r for r in ratios if not math.isnan(r)]
    return {
        "a": a,
        "b": b,
        "t": ts,
        "survival": survival,
        "ratios": ratios,
        "max_ratio": max(finite) if finite else math.nan,
        "monotone": all(s2 <= s1 for s1, s2 in zip(survival, survival[1:])),
        "mean_tau": float(taus.mean()),
        "n_replicas": n_replicas,
    }


def backtrack_stat(runs: BilliardRun | Iterable[BilliardRun], H_list: Sequence[float]) -> dict[str, Any]:
    """
    For each H, the fraction of runs that ever go below xi_0.e - H (strictly below the
    start for H = 0), and the slope of log-frequency against sqrt(H).
    """
    runs = [runs] if isinstance(runs, BilliardRun) else list(runs)
    if not runs:
        raise ValueError("no runs")
    lows = np.array([float(np.min(r.alphas) - r.alphas[0]) for r in runs])
    freqs = [float(np.mean(lows < -h)) for h in H_list]
    out: dict[str, Any] = {"H": list(H_list), "frequency": freqs, "runs": len(runs)}
    keep = [(math.sqrt(h), math.log(f)) for h, f in zip(H_list, freqs) if f > 0.0]
    if len(keep) >= 3:
        res = stats.linregress([k[0] for k in keep], [k[1] for k in keep])
        out["sqrt_slope"] = float(res.slope)
        out["sqrt_slope_stderr"] = float(res.stderr)
    return out


def chord_axial_lengths(
    tube: Tube, n_samples: int, seed: int, band: int = 0, threads: int | None = None
) -> np.ndarray:
    """Proposed axial displacements of cos-law chords from surface-uniform points of ``band``."""
    if tube.constant:
        rng = make_rng(seed)
        U = rng.random((n_samples, 3))
        delta, _, _, _ = cylinder_block(tube.cell_radius(0), 0.0, U, make_rng(derive_seed(seed, TAG_BILLIARD, 1)))
        return delta

    def job(args: tuple[int, int]) -> list[float]:
        n, s = args
        rng = make_rng(s)
        resample_rng = make_rng(derive_seed(s, TAG_BILLIARD, 1))
        out = []
        for _ in range(n):
            x = sample_boundary_uniform(tube, band, rng)
            u_cos, u_az = rng.random(2)
            y, _, _ = propose(tube, x, float(u_cos), float(u_az), resample_rng)
            out.append(y.alpha - x.alpha)
        return out

    parts = map_replicas(job, _chunked(n_samples, seed, 8), threads)
    return np.array([d for part in parts for d in part])


def chord_tail(tube: Tube, n_samples: int, seed: int, h_min: float = 2.0, h_max: float = 20.0) -> dict[str, Any]:
    """Fitted exponent a of P[|Delta| > h] ~ C h^-a for the chord axial length."""
    return fit_tail_exponent(chord_axial_lengths(tube, n_samples, seed), h_min, h_max)
