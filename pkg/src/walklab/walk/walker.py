# src/walklab/walk/walker.py
"""The truncated walk S^rho in a fixed environment: single runs, coupled pairs, hitting times."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from walklab.env import Environment, TruncationLevel, as_rho
from walklab.report.csv_out import write_csv
from walklab.utils.invariants import record_checks, require
from walklab.utils.seeding import TAG_COUPLING, TAG_WALK, derive_seed, make_rng
from walklab.walk.alias import AliasTable

logger = logging.getLogger(__name__)

BLOCK = 65536
DEFAULT_STEP_CAP = 10_000_000
MIN_PAD = 4096


class StepKernel:
    """
    One step of S^rho: draw Y from the site's law with one uniform, stay put if |Y| >= rho.

    Holds a private window of driver states; not shared between threads.
    """

    def __init__(self, env: Environment, rho, table: AliasTable | None = None) -> None:
        self.env = env
        self.level: TruncationLevel = as_rho(rho)
        self.cut = self.level.rho
        self.table = table or AliasTable.for_environment(env)
        self.homogeneous = env.n_states == 1
        self._lo = 0
        self._hi = 0
        self._states = np.zeros(0, dtype=np.int64)
        self._list: list[int] = []

    def _cover(self, lo: int, hi: int) -> None:
        if self._hi > self._lo:
            if self._lo <= lo and hi <= self._hi:
                return
            lo, hi = min(lo, self._lo), max(hi, self._hi)
        pad = max(MIN_PAD, hi - lo)
        self._lo, self._hi = lo - pad, hi + pad
        self._states = self.env.states(self._lo, self._hi).astype(np.int64)
        self._list = self._states.tolist()

    def state(self, x: int) -> int:
        if not self._lo <= x < self._hi:
            self._cover(x, x + 1)
        return self._list[x - self._lo]

    def states(self, xs: np.ndarray) -> np.ndarray:
        if self.homogeneous:
            return np.zeros(len(xs), dtype=np.int64)
        self._cover(int(xs.min()), int(xs.max()) + 1)
        return self._states[xs - self._lo]

    def step_one(self, x: int, u: float) -> tuple[int, bool]:
        y = self.table.draw_one(self.state(x), u)
        if abs(y) >= self.cut:
            return x, True
        return x + y, False

    def moves(self, states: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        y = self.table.draw(states, u)
        cut = np.abs(y) >= self.cut
        return np.where(cut, 0, y), cut


@dataclass
class WalkRun:
    positions: np.ndarray
    rho: TruncationLevel
    start: int
    seed: int
    rejected_steps: int = 0
    separated_at: int | None = None

    @property
    def n_steps(self) -> int:
        return len(self.positions) - 1

    @property
    def final(self) -> int:
        return int(self.positions[-1])


@dataclass(frozen=True)
class HitRecord:
    target: int
    T: int | None
    landed_at: int | None
    exact: bool
    start: int = 0

    @property
    def reached(self) -> bool:
        return self.T is not None


@dataclass
class VisitCounts:
    window: tuple[int, int]
    counts: dict[int, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())


def check_truncation(run: WalkRun) -> None:
    """Every recorded step is shorter than rho."""
    if run.n_steps == 0:
        return
    steps = np.abs(np.diff(run.positions))
    record_checks("truncation_size", run.n_steps - 1)
    require(bool(np.all(steps < run.rho.rho)), "truncation_size", f"step of size {int(steps.max())} with rho={run.rho}")


def run_walk(env: Environment, rho, x0: int, n_steps: int, seed: int) -> WalkRun:
    """Trajectory S^rho_0..S^rho_n from ``x0``; deterministic in its arguments."""
    if n_steps < 0:
        raise ValueError(f"n_steps must be >= 0, got {n_steps}")
    kernel = StepKernel(env, rho)
    rng = make_rng(seed)
    x0 = int(x0)
    positions = np.empty(n_steps + 1, dtype=np.int64)
    positions[0] = x0
    rejected = 0

    if kernel.homogeneous:
        done, x = 0, x0
        zeros = np.zeros(min(BLOCK, max(n_steps, 1)), dtype=np.int64)
        while done < n_steps:
            b = min(BLOCK, n_steps - done)
            moves, cut = kernel.moves(zeros[:b], rng.random(b))
            positions[done + 1: done + b + 1] = x + np.cumsum(moves)
            x = int(positions[done + b])
            rejected += int(cut.sum())
            done += b
    else:
        path: list[int] = []
        x, done = x0, 0
        step_one = kernel.step_one
        while done < n_steps:
            b = min(BLOCK, n_steps - done)
            for u in rng.random(b).tolist():
                x, cut = step_one(x, u)
                rejected += cut
                path.append(x)
            done += b
        positions[1:] = path

    run = WalkRun(positions=positions, rho=kernel.level, start=x0, seed=int(seed), rejected_steps=int(rejected))
    check_truncation(run)
    return run


def run_coupled(env: Environment, rho1, rho2, x0: int, n_steps: int, seed: int) -> tuple[WalkRun, WalkRun]:
    """
    Natural coupling of S^rho1 and S^rho2 (rho1 <= rho2).

    While the walks sit on the same site they share the proposal Y_n (from the walk
    stream) and each applies its own cut. Once apart, walk 2 draws from a second,
    independent stream. Walk 1 alone is exactly ``run_walk`` on the walk stream.
    """
    level1, level2 = as_rho(rho1), as_rho(rho2)
    if level1.rho > level2.rho:
        raise ValueError(f"need rho1 <= rho2, got {level1} > {level2}")
    if n_steps < 0:
        raise ValueError(f"n_steps must be >= 0, got {n_steps}")

    table = AliasTable.for_environment(env)
    kernel = StepKernel(env, level1, table)
    cut1, cut2 = level1.rho, level2.rho
    draw_one = table.draw_one
    state = kernel.state

    rng_a = make_rng(derive_seed(seed, TAG_WALK))
    rng_b = make_rng(derive_seed(seed, TAG_COUPLING))
    x1 = x2 = int(x0)
    path1, path2 = [x1], [x2]
    rejected1 = rejected2 = 0
    separated_at = None

    done = 0
    while done < n_steps:
        b = min(BLOCK, n_steps - done)
        ua = rng_a.random(b).tolist()
        ub = rng_b.random(b).tolist()
        for i in range(b):
            if x1 == x2:
                y = draw_one(state(x1), ua[i])
                c1, c2 = abs(y) >= cut1, abs(y) >= cut2
                if not c1:
                    x1 += y
                if not c2:
                    x2 += y
                if x1 != x2 and separated_at is None:
                    separated_at = done + i + 1
            else:
                y1 = draw_one(state(x1), ua[i])
                y2 = draw_one(state(x2), ub[i])
                c1, c2 = abs(y1) >= cut1, abs(y2) >= cut2
                if not c1:
                    x1 += y1
                if not c2:
                    x2 += y2
            rejected1 += c1
            rejected2 += c2
            path1.append(x1)
            path2.append(x2)
        done += b

    walk_seed = derive_seed(seed, TAG_WALK)
    run1 = WalkRun(np.asarray(path1, dtype=np.int64), level1, int(x0), walk_seed, int(rejected1), separated_at)
    run2 = WalkRun(np.asarray(path2, dtype=np.int64), level2, int(x0), int(seed), int(rejected2), separated_at)
    check_truncation(run1)
    check_truncation(run2)
    return run1, run2


def hit(env: Environment, rho, x0: int, z: int, seed: int, step_cap: int = DEFAULT_STEP_CAP) -> HitRecord:
    """
    First time T with S^rho_T >= z, where the walk landed, and whether it landed on z.

    Uses the same stream as ``run_walk`` with the same seed. Running out of
    ``step_cap`` steps gives ``T = None``.
    """
    if step_cap < 1:
        raise ValueError(f"step_cap must be >= 1, got {step_cap}")
    x0, z = int(x0), int(z)
    if x0 >= z:
        return HitRecord(target=z, T=0, landed_at=x0, exact=x0 == z, start=x0)

    kernel = StepKernel(env, rho)
    rng = make_rng(seed)
    x, done = x0, 0

    if kernel.homogeneous:
        zeros = np.zeros(min(BLOCK, step_cap), dtype=np.int64)
        while done < step_cap:
            b = min(BLOCK, step_cap - done)
            moves, _ = kernel.moves(zeros[:b], rng.random(b))
            path = x + np.cumsum(moves)
            over = np.flatnonzero(path >= z)
            if len(over):
                k = int(over[0])
                landed = int(path[k])
                return HitRecord(target=z, T=done + k + 1, landed_at=landed, exact=landed == z, start=x0)
            x = int(path[-1])
            done += b
    else:
        step_one = kernel.step_one
        while done < step_cap:
            b = min(BLOCK, step_cap - done)
            for i, u in enumerate(rng.random(b).tolist()):
                x, _ = step_one(x, u)
                if x >= z:
                    return HitRecord(target=z, T=done + i + 1, landed_at=x, exact=x == z, start=x0)
            done += b

    logger.debug(f"hit: step cap {step_cap} exhausted before reaching {z} from {x0}")
    return HitRecord(target=z, T=None, landed_at=None, exact=False, start=x0)


def visit_counts(run: WalkRun, window: tuple[int, int]) -> VisitCounts:
    """Visits of the run to every site of the inclusive ``window``."""
    lo, hi = int(window[0]), int(window[1])
    pos = run.positions
    inside = pos[(pos >= lo) & (pos <= hi)] - lo
    counts = np.bincount(inside, minlength=hi - lo + 1) if hi >= lo else np.zeros(0, dtype=np.int64)
    return VisitCounts(window=(lo, hi), counts={lo + i: int(c) for i, c in enumerate(counts)})


def final_positions(env: Environment, rho, x0: int, n_steps: int, seeds: list[int]) -> tuple[np.ndarray, np.ndarray]:
    """
    Final positions and rejected-step counts of one walk per seed.

    Walkers advance in lockstep, each on its own stream, so every entry equals
    ``run_walk(env, rho, x0, n_steps, seed).final`` for its seed.
    """
    kernel = StepKernel(env, rho)
    rngs = [make_rng(s) for s in seeds]
    R = len(seeds)
    pos = np.full(R, int(x0), dtype=np.int64)
    rejected = np.zeros(R, dtype=np.int64)
    if R == 0:
        return pos, rejected

    if kernel.homogeneous:
        zeros = np.zeros(min(BLOCK, max(n_steps, 1)), dtype=np.int64)
        for r, rng in enumerate(rngs):
            done = 0
            while done < n_steps:
                b = min(BLOCK, n_steps - done)
                moves, cut = kernel.moves(zeros[:b], rng.random(b))
                pos[r] += int(moves.sum())
                rejected[r] += int(cut.sum())
                done += b
        return pos, rejected

    block = max(1, min(BLOCK // 16, n_steps))
    done = 0
    while done < n_steps:
        b = min(block, n_steps - done)
        U = np.stack([rng.random(b) for rng in rngs], axis=0)
        for j in range(b):
            moves, cut = kernel.moves(kernel.states(pos), U[:, j])
            pos += moves
            rejected += cut
        done += b
    return pos, rejected


def dump_run_csv(run: WalkRun, path: str) -> int:
    return write_csv(path, ("step", "position"), enumerate(run.positions.tolist()))
