# src/walklab/billiard/kernel.py
"""
One step of the Knudsen walk with drift.

From a boundary point x the outgoing direction has density proportional to the cosine
with the inner normal; the chord ends at the first boundary point y seen from x. A
proposal with Delta = (y - x).e >= 0 is always taken, otherwise it is taken with
probability e^{lam Delta}; a refused proposal is a holding step.

Every step consumes three uniforms (cos-law, azimuth, acceptance). Tangent rays and
chords longer than the simulated window redraw the first two from a separate stream.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy import integrate

from walklab.stats import Estimate, ks_distance, mean_stderr, proportion
from walklab.tube import (
    BoundaryPoint,
    DegenerateRayError,
    Tube,
    WindowExhaustedError,
    boundary_residual,
    inner_normal,
    ray_exit,
)
from walklab.tube.ray import DEFAULT_MAX_CELLS, DISC_TOL
from walklab.utils.invariants import require
from walklab.utils.seeding import make_rng

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-10
MAX_RESAMPLES = 1000


class BilliardParamsError(ValueError):
    pass


@dataclass(frozen=True)
class BilliardParams:
    lam: float
    N_skeleton: int = 2
    r1: float = 0.1
    L: int = 3

    def __post_init__(self) -> None:
        if not self.lam >= 0.0:
            raise BilliardParamsError(f"lambda must be >= 0, got {self.lam}")
        if not 0.0 < self.r1 <= 1.0:
            raise BilliardParamsError(f"r1 must be in (0, 1], got {self.r1}")
        if self.N_skeleton < 1:
            raise BilliardParamsError(f"N_skeleton must be >= 1, got {self.N_skeleton}")
        if self.L < 1:
            raise BilliardParamsError(f"L must be >= 1, got {self.L}")

    def summary(self) -> dict[str, Any]:
        return {"lambda": self.lam, "N_skeleton": self.N_skeleton, "r1": self.r1, "L": self.L}


@dataclass(frozen=True)
class Proposal:
    start: BoundaryPoint
    end: BoundaryPoint
    delta: float
    chord: float
    accepted: bool


def _frame(n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal e1, e2 spanning the plane orthogonal to n; e1 is the axis whenever n is not axial."""
    if abs(n[0]) < 0.5:
        e1 = np.array([1.0, 0.0, 0.0]) - n[0] * n
    else:
        e1 = np.array([0.0, 1.0, 0.0]) - n[1] * n
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(n, e1)


def cosine_direction(normal: np.ndarray, u_cos: float, u_azimuth: float) -> np.ndarray:
    """Cos-law direction from two uniforms in [0, 1): w.n = sqrt(1 - u_cos) > 0."""
    t = math.sqrt(1.0 - u_cos)
    s = math.sqrt(max(0.0, 1.0 - t * t))
    psi = 2.0 * math.pi * u_azimuth
    e1, e2 = _frame(normal)
    return t * normal + s * math.cos(psi) * e1 + s * math.sin(psi) * e2


def sample_cosine(normal: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    u_cos, u_azimuth = rng.random(2)
    return cosine_direction(np.asarray(normal, dtype=float), float(u_cos), float(u_azimuth))


def accept_probability(delta: float, lam: float) -> float:
    return 1.0 if delta >= 0.0 else math.exp(lam * delta)


def propose(
    tube: Tube, x: BoundaryPoint, u_cos: float, u_azimuth: float, resample_rng: np.random.Generator
) -> tuple[BoundaryPoint, float, int]:
    """Exit point of the cos-law chord from ``x``, its length and the number of redraws needed."""
    n = inner_normal(tube, x)
    for resamples in range(MAX_RESAMPLES):
        w = cosine_direction(n, u_cos, u_azimuth)
        try:
            y, chord = ray_exit(tube, x, w)
            return y, chord, resamples
        except (DegenerateRayError, WindowExhaustedError) as e:
            logger.warning(f"Redrawing direction at alpha={x.alpha:.6f}: {e}")
            u_cos, u_azimuth = (float(v) for v in resample_rng.random(2))
    raise DegenerateRayError(f"no usable direction from alpha={x.alpha} after {MAX_RESAMPLES} draws")


def advance(
    tube: Tube,
    lam: float,
    x: BoundaryPoint,
    u: tuple[float, float, float],
    resample_rng: np.random.Generator,
) -> tuple[BoundaryPoint, Proposal, int]:
    """Apply one step with the given uniforms; returns (next point, proposal, redraws)."""
    y, chord, resamples = propose(tube, x, u[0], u[1], resample_rng)
    require(boundary_residual(tube, y) < RESIDUAL_TOL, "boundary_residual", f"exit point {y}")
    delta = y.alpha - x.alpha
    accepted = delta >= 0.0 or u[2] < math.exp(lam * delta)
    require(accepted or delta < 0.0, "rightward_accepted", f"delta={delta}")
    nxt = y if accepted else x
    return nxt, Proposal(start=x, end=y, delta=delta, chord=chord, accepted=accepted), resamples


def step(
    tube: Tube,
    params: BilliardParams,
    x: BoundaryPoint,
    rng: np.random.Generator,
    resample_rng: np.random.Generator | None = None,
) -> tuple[BoundaryPoint, Proposal]:
    """One step from ``x``; a refused proposal returns ``x`` itself."""
    u = tuple(float(v) for v in rng.random(3))
    nxt, proposal, _ = advance(tube, params.lam, x, u, resample_rng or rng)
    require(proposal.accepted or nxt is x, "holding_stays_put")
    return nxt, proposal


def cylinder_block(
    radius: float, lam: float, U: np.ndarray, resample_rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """
    Steps on a straight cylinder in closed form, one row of ``U`` per step.

    On a cylinder the chord depends only on the direction relative to the local frame:
    with t = w.n and azimuth psi measured from the axis,
    Delta = 2 R t s cos(psi) / (t^2 + s^2 sin^2(psi)) with s = sqrt(1 - t^2), and the
    angular advance follows from the exit point in the (radial, tangential) frame.
    Returns (Delta, angular advance, accepted, redraws).
    """
    u_cos = U[:, 0].copy()
    u_az = U[:, 1].copy()
    redraws = 0

    def chords(uc: np.ndarray, ua: np.ndarray):
        t = np.sqrt(1.0 - uc)
        s = np.sqrt(np.maximum(0.0, 1.0 - t * t))
        psi = 2.0 * np.pi * ua
        a = t * t + (s * np.sin(psi)) ** 2
        t_exit = 2.0 * radius * t / a
        delta = t_exit * s * np.cos(psi)
        dphi = np.arctan2(t_exit * s * np.sin(psi), radius - t_exit * t)
        bad = (radius * radius * t * t < DISC_TOL) | (np.abs(delta) > DEFAULT_MAX_CELLS)
        return delta, dphi, bad

    delta, dphi, bad = chords(u_cos, u_az)
    for i in np.flatnonzero(bad):
        while True:
            redraws += 1
            logger.warning(f"Redrawing degenerate cylinder chord at step offset {i}")
            uc, ua = resample_rng.random(2)
            d, p, b = chords(np.array([uc]), np.array([ua]))
            if not b[0]:
                delta[i], dphi[i] = d[0], p[0]
                break
    accepted = (delta >= 0.0) | (U[:, 2] < np.exp(lam * np.minimum(delta, 0.0)))
    return delta, dphi, accepted, redraws


def estimate_theta(tube: Tube, params: BilliardParams, x: BoundaryPoint, n_samples: int, seed: int) -> Estimate:
    """Holding probability at ``x`` as the frequency of refused proposals."""
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    rng = make_rng(seed)
    refused = 0
    for _ in range(n_samples):
        _, proposal = step(tube, params, x, rng)
        refused += not proposal.accepted
    return proportion(refused, n_samples)


def theta_cylinder_quadrature(radius: float, lam: float) -> float:
    """
    Holding probability on a straight cylinder by 2-D quadrature over (t, psi):
    t has density 2t on [0, 1], psi is uniform, and only psi with cos(psi) < 0 can be refused.
    """
    if lam == 0.0:
        return 0.0

    def refused(t: float, psi: float) -> float:
        s = math.sqrt(max(0.0, 1.0 - t * t))
        a = t * t + (s * math.sin(psi)) ** 2
        if a == 0.0:
            return 2.0 * t / (2.0 * math.pi)
        delta = 2.0 * radius * t * s * math.cos(psi) / a
        return 2.0 * t * (1.0 - math.exp(lam * delta)) / (2.0 * math.pi)

    value, err = integrate.dblquad(refused, 0.5 * math.pi, 1.5 * math.pi, 0.0, 1.0, epsabs=1e-10, epsrel=1e-9)
    logger.debug(f"theta quadrature R={radius} lam={lam}: {value} (+- {err:.1e})")
    return float(value)


def cosine_constant() -> float:
    """gamma such that gamma * cos(theta) is a probability density on the unit half-sphere (1/pi in R^3)."""
    total, _ = integrate.dblquad(
        lambda theta, phi: math.cos(theta) * math.sin(theta), 0.0, 2.0 * math.pi, 0.0, 0.5 * math.pi
    )
    return 1.0 / total


def cosine_sampler_check(n_samples: int, seed: int, normal=(0.0, -1.0, 0.0)) -> dict[str, Any]:
    """KS distance of w.n against its law P[w.n <= t] = t^2, and the mean of w.n (exactly 2/3)."""
    n = np.asarray(normal, dtype=float)
    rng = make_rng(seed)
    dots = np.array([float(np.dot(sample_cosine(n, rng), n)) for _ in range(n_samples)])
    return {
        "n_samples": n_samples,
        "ks_distance": ks_distance(dots, lambda t: np.clip(t, 0.0, 1.0) ** 2),
        "mean": mean_stderr(dots).summary(),
        "mean_exact": 2.0 / 3.0,
        "min_dot": float(dots.min()),
    }
