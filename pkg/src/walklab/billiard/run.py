# src/walklab/billiard/run.py
"""Trajectories of the Knudsen walk with drift and the law-of-large-numbers estimate."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from walklab.billiard.kernel import BilliardParams, Proposal, advance, cylinder_block
from walklab.report.csv_out import write_csv
from walklab.stats import Estimate, mean_stderr
from walklab.tube import LATERAL, BoundaryPoint, Patch, Tube, embed, sample_boundary_uniform, visibility_roundtrip
from walklab.utils.invariants import record_checks, require
from walklab.utils.pool import map_replicas
from walklab.utils.seeding import TAG_BILLIARD, TAG_REPLICA, derive_seed, make_rng

logger = logging.getLogger(__name__)

BLOCK = 65536
VISIBILITY_TOL = 1e-9

# sub-streams under TAG_BILLIARD
_RESAMPLE = 1
_START = 2


@dataclass
class BilliardRun:
    """xi_0..xi_n by axial coordinate and angle, with the proposal of every step."""

    alphas: np.ndarray
    angles: np.ndarray
    deltas: np.ndarray
    accepted: np.ndarray
    start: BoundaryPoint
    final: BoundaryPoint
    seed: int
    lam: float
    redraws: int = 0
    patches: list[str] | None = None

    @property
    def n_steps(self) -> int:
        return len(self.deltas)

    @property
    def displacement(self) -> float:
        return float(self.alphas[-1] - self.alphas[0])

    @property
    def holding_fraction(self) -> float:
        return float(1.0 - self.accepted.mean()) if self.n_steps else 0.0


def check_run(run: BilliardRun) -> None:
    """Rightward proposals were taken and refused steps left the walker in place."""
    if run.n_steps == 0:
        return
    record_checks("rightward_accepted", run.n_steps - 1)
    require(bool(np.all(run.accepted | (run.deltas < 0.0))), "rightward_accepted", "a rightward proposal was refused")
    held = ~run.accepted
    record_checks("holding_stays_put", run.n_steps - 1)
    require(
        bool(np.all(run.alphas[1:][held] == run.alphas[:-1][held])),
        "holding_stays_put",
        "a refused step moved the walker",
    )


def _run_cylinder(tube: Tube, params: BilliardParams, start: BoundaryPoint, n_steps: int, seed: int) -> BilliardRun:
    radius = tube.cell_radius(0)
    rng = make_rng(seed)
    resample_rng = make_rng(derive_seed(seed, TAG_BILLIARD, _RESAMPLE))
    alphas = np.empty(n_steps + 1)
    angles = np.empty(n_steps + 1)
    deltas = np.empty(n_steps)
    accepted = np.empty(n_steps, dtype=bool)
    alphas[0], angles[0] = start.alpha, start.angle
    a, phi, redraws, done = start.alpha, start.angle, 0, 0
    while done < n_steps:
        b = min(BLOCK, n_steps - done)
        delta, dphi, acc, r = cylinder_block(radius, params.lam, rng.random((b, 3)), resample_rng)
        alphas[done + 1: done + b + 1] = a + np.cumsum(np.where(acc, delta, 0.0))
        angles[done + 1: done + b + 1] = np.mod(phi + np.cumsum(np.where(acc, dphi, 0.0)), 2.0 * math.pi)
        deltas[done: done + b] = delta
        accepted[done: done + b] = acc
        a, phi = float(alphas[done + b]), float(angles[done + b])
        redraws += r
        done += b
    record_checks("boundary_residual", n_steps)
    final = BoundaryPoint(alpha=a, patch=Patch(kind=LATERAL, index=math.floor(a)), angle=phi, radial=radius)
    return BilliardRun(
        alphas=alphas, angles=angles, deltas=deltas, accepted=accepted,
        start=start, final=final, seed=int(seed), lam=params.lam, redraws=redraws,
    )


def _run_general(
    tube: Tube, params: BilliardParams, start: BoundaryPoint, n_steps: int, seed: int, check_visibility: bool
) -> BilliardRun:
    rng = make_rng(seed)
    resample_rng = make_rng(derive_seed(seed, TAG_BILLIARD, _RESAMPLE))
    alphas = np.empty(n_steps + 1)
    angles = np.empty(n_steps + 1)
    deltas = np.empty(n_steps)
    accepted = np.empty(n_steps, dtype=bool)
    patches = [start.patch.label()]
    alphas[0], angles[0] = start.alpha, start.angle
    x, redraws, done = start, 0, 0
    while done < n_steps:
        b = min(BLOCK, n_steps - done)
        for k, u in enumerate(rng.random((b, 3)).tolist(), start=done):
            nxt, proposal, r = advance(tube, params.lam, x, u, resample_rng)
            if check_visibility:
                w = _direction(proposal)
                require(visibility_roundtrip(tube, x, w) < VISIBILITY_TOL, "visibility_roundtrip", f"from {x}")
            x = nxt
            redraws += r
            alphas[k + 1], angles[k + 1] = x.alpha, x.angle
            deltas[k], accepted[k] = proposal.delta, proposal.accepted
            patches.append(x.patch.label())
        done += b
    return BilliardRun(
        alphas=alphas, angles=angles, deltas=deltas, accepted=accepted,
        start=start, final=x, seed=int(seed), lam=params.lam, redraws=redraws, patches=patches,
    )


def _direction(proposal: Proposal) -> np.ndarray:
    d = embed(proposal.end) - embed(proposal.start)
    return d / np.linalg.norm(d)


def run_billiard(
    tube: Tube,
    params: BilliardParams,
    start: BoundaryPoint,
    n_steps: int,
    seed: int,
    general: bool = False,
    check_visibility: bool = False,
) -> BilliardRun:
    """
    n steps from ``start``. Straight cylinders use the closed-form block kernel unless
    ``general`` is set; ``check_visibility`` re-traces every chord backwards (general path only).
    """
    if n_steps < 0:
        raise ValueError(f"n_steps must be >= 0, got {n_steps}")
    if tube.constant and not general and not check_visibility:
        run = _run_cylinder(tube, params, start, n_steps, seed)
    else:
        run = _run_general(tube, params, start, n_steps, seed, check_visibility)
    check_run(run)
    if run.redraws:
        logger.info(f"Billiard run seed={seed}: {run.redraws} direction redraws")
    return run


def start_point(tube: Tube, seed: int, band: int = 0) -> BoundaryPoint:
    """Surface-uniform start on ``band`` from the run's own start stream."""
    return sample_boundary_uniform(tube, band, derive_seed(seed, TAG_BILLIARD, _START))


@dataclass(frozen=True)
class LLNResult:
    speed: Estimate
    zero_speed: bool
    holding_fraction: float
    redraws: int
    n_steps: int

    def summary(self) -> dict[str, Any]:
        lo, hi = self.speed.ci(0.99)
        return {
            "v": self.speed.summary(),
            "ci99": [lo, hi],
            "zero_speed": self.zero_speed,
            "positive_speed": lo > 0.0,
            "holding_fraction": self.holding_fraction,
            "redraws": self.redraws,
            "n_steps": self.n_steps,
        }


def run_lln(
    tube: Tube, params: BilliardParams, n_steps: int, n_replicas: int, seed: int, threads: int | None = None
) -> LLNResult:
    """v_hat = mean over replicas of (xi_n - xi_0).e / n, each replica starting surface-uniform on band 0."""
    if n_steps < 1 or n_replicas < 2:
        raise ValueError("run_lln needs n_steps >= 1 and at least 2 replicas")
    seeds = [derive_seed(seed, TAG_REPLICA, i) for i in range(n_replicas)]

    def one(s: int) -> tuple[float, float, int]:
        run = run_billiard(tube, params, start_point(tube, s), n_steps, s)
        logger.debug(f"billiard replica seed={s}: displacement {run.displacement:.3f}")
        return run.displacement / n_steps, run.holding_fraction, run.redraws

    rows = map_replicas(one, seeds, threads)
    speed = mean_stderr([r[0] for r in rows])
    result = LLNResult(
        speed=speed,
        zero_speed=abs(speed.value) < 3.0 * speed.stderr,
        holding_fraction=float(np.mean([r[1] for r in rows])),
        redraws=sum(r[2] for r in rows),
        n_steps=n_steps,
    )
    logger.info(f"run_lln lam={params.lam}: v={speed.value:.5f} +- {speed.stderr:.5f}")
    return result


def dump_trajectory_csv(run: BilliardRun, path: str) -> int:
    """Rows (step, alpha, patch, angle, delta, accepted); delta and accepted describe the step into the row."""

    def rows():
        for k in range(run.n_steps + 1):
            patch = run.patches[k] if run.patches else f"{LATERAL}({math.floor(run.alphas[k])})"
            if k == 0:
                yield (0, run.alphas[0], patch, run.angles[0], "", "")
            else:
                yield (k, run.alphas[k], patch, run.angles[k], run.deltas[k - 1], int(run.accepted[k - 1]))

    return write_csv(path, ("step", "alpha", "patch", "angle", "delta", "accepted"), rows())
