# src/walklab/experiments/runner.py
"""
Runs one experiment config end to end: builds the environment or tube, calls the
estimators for the experiment kind, writes the JSON report (plus optional CSV series)
and records the run in the ledger.

Exit codes: 0 ok, 1 config or unexpected error, 2 diagnostic failure (a guard tripped,
an oracle disagreed, or one of the experiment's acceptance checks failed).
"""

from __future__ import annotations

import logging
import math
import os
import sqlite3
from dataclasses import dataclass, field
from typing import Any, Callable

from walklab.billiard import (
    BilliardParams,
    SkeletonError,
    backtrack_stat,
    chord_tail,
    cosine_sampler_check,
    detailed_balance_test,
    dump_trajectory_csv,
    exit_time_tail,
    extract_skeleton,
    hitting_bound_test,
    run_billiard,
    run_lln,
    skeleton_markov_test,
    skeleton_summary,
    skeleton_tail,
    skeleton_transition_counts,
    start_point,
    theta_cylinder_quadrature,
)
from walklab.db import connect, finish_run, start_run
from walklab.env import Environment, as_rho, build_environment, describe_sites, truncate
from walklab.models.config import Config
from walklab.models.experiment import ExperimentConfig
from walklab.oracle import OracleError, exact_hit_bracket, periodic_env_chain, periodic_speed
from walklab.regen import (
    RegenerationError,
    cycle_exchangeability,
    duration_scaling,
    env_marginal,
    merge_records,
    occupation_direct,
    occupation_Q,
    rn_density,
    run_regen_replicas,
    speed_cycle,
    speed_direct,
    speed_from_occupation,
    speed_vs_rho,
    split_for,
)
from walklab.report import (
    STATUS_DIAGNOSTIC_FAILURE,
    STATUS_ERROR,
    STATUS_OK,
    build_report,
    write_csv,
    write_dict_csv,
    write_report,
)
from walklab.stats import mean_stderr, proportion, relative_difference, within_sigma
from walklab.tube import DegenerateRayError, Tube, build_tube
from walklab.utils.invariants import InvariantViolation, reset_tally, tally
from walklab.utils.pool import map_replicas
from walklab.utils.seeding import TAG_BILLIARD, TAG_REPLICA, TAG_WALK, derive_seed
from walklab.utils.time import Stopwatch, now_iso
from walklab.utils.version import version_string
from walklab.walk import ConditionDError, dump_run_csv, estimate_condition_D, hit, run_walk

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIAGNOSTIC = 2

DIAGNOSTIC_ERRORS = (
    ConditionDError,
    RegenerationError,
    OracleError,
    SkeletonError,
    DegenerateRayError,
    InvariantViolation,
)

# acceptance thresholds of the checks each experiment reports
TOL = {
    "speed_oracle_rel": 0.01,
    "speed_cycle_rel": 0.02,
    "truncation_gap": 0.01,
    "duration_bracket_ratio": 4.0,
    "occupation_tv": 0.02,
    "rn_change": 0.10,
    "exit_ratio": 0.9,
    "tail_exponent": 1.8,
    "cosine_ks": 0.01,
    "cosine_mean": 0.005,
}
CSV_MAX_STEPS = 10_000
VISIBILITY_STEPS = 2_000


class DiagnosticFailure(RuntimeError):
    pass


@dataclass
class RunContext:
    cfg: ExperimentConfig
    config: Config
    report_path: str
    results: dict[str, Any] = field(default_factory=dict)
    checks: dict[str, bool] = field(default_factory=dict)
    csv_paths: list[str] = field(default_factory=list)

    @property
    def seed(self) -> int:
        return self.cfg.seed

    @property
    def threads(self) -> int:
        return self.config.threads

    def get(self, key: str, default: Any = None) -> Any:
        return self.cfg.get(key, default)

    def check(self, name: str, passed: bool) -> bool:
        self.checks[name] = bool(passed)
        if not passed:
            logger.warning(f"Check failed: {name}")
        return bool(passed)

    def csv_path(self, name: str) -> str | None:
        if not self.get("CSV"):
            return None
        base, _ = os.path.splitext(self.report_path)
        path = f"{base}_{name}.csv"
        self.csv_paths.append(path)
        return path

    def environment(self) -> Environment:
        return build_environment(self.get("ENVIRONMENT"), self.seed, self.config.max_jump)

    def tube(self, seed: int | None = None) -> Tube:
        return build_tube(self.get("TUBE"), self.seed if seed is None else seed)

    def params(self, lam: float) -> BilliardParams:
        return BilliardParams(
            lam=float(lam),
            N_skeleton=int(self.get("N_SKELETON")),
            r1=float(self.get("R1")),
            L=int(self.get("BLOCK_LENGTH")),
        )


@dataclass(frozen=True)
class RunOutcome:
    status: str
    exit_code: int
    report: dict[str, Any]
    report_path: str
    csv_paths: list[str]


HANDLERS: dict[str, Callable[[RunContext], None]] = {}


def handler(kind: str):
    def register(fn: Callable[[RunContext], None]) -> Callable[[RunContext], None]:
        HANDLERS[kind] = fn
        return fn

    return register


def _exact_speed(env: Environment, rho) -> float | None:
    if env.n_states == 1:
        return truncate(env.laws[0], as_rho(rho)).mean()
    if env.is_periodic:
        return periodic_speed(env, rho)
    return None


def _condition_D_guard(ctx: RunContext, env: Environment, rhos: list) -> None:
    depth = ctx.get("DEPTH")
    if depth is None:
        return
    rows = []
    ctx.results["condition_D"] = rows
    for rho in rhos:
        est = estimate_condition_D(env, rho, depth, ctx.get("REPLICAS"), ctx.seed, threads=ctx.threads)
        rows.append(est.summary())
        if not est.passed:
            raise ConditionDError(f"Condition D guard tripped at rho={est.rho}")


@handler("rwre_speed")
def _rwre_speed(ctx: RunContext) -> None:
    env = ctx.environment()
    rhos = ctx.get("RHO")
    steps, replicas = ctx.get("STEPS"), ctx.get("REPLICAS")
    ctx.results["environment"] = {"spec": env.spec(), "hash": env.environment_hash()}
    _condition_D_guard(ctx, env, rhos)

    levels = [as_rho(r) for r in rhos]
    increasing = all(b.rho > a.rho for a, b in zip(levels, levels[1:]))
    if len(levels) > 1 and levels[-1].is_infinite and increasing:
        rows = speed_vs_rho(env, rhos, steps, replicas, ctx.seed, threads=ctx.threads)
        gaps = [(r["gap_to_inf"], math.hypot(r["stderr"], rows[-1]["stderr"])) for r in rows[:-1]]
        ctx.check("truncation_gap", gaps[-1][0] < TOL["truncation_gap"])
        ctx.check(
            "truncation_gap_nonincreasing",
            all(g2 <= g1 + max(s1, s2) for (g1, s1), (g2, s2) in zip(gaps, gaps[1:])),
        )
    else:
        rows = []
        for level in levels:
            est = speed_direct(env, level, steps, replicas, ctx.seed, threads=ctx.threads)
            rows.append({"rho": level.label(), "v": est.value, "stderr": est.stderr})

    for row in rows:
        exact = _exact_speed(env, row["rho"])
        if exact is None:
            continue
        row["v_exact"] = exact
        row["relative_error"] = relative_difference(row["v"], exact)
        tol = max(3.0 * row["stderr"], TOL["speed_oracle_rel"] * abs(exact))
        ctx.check(f"speed_oracle_rho_{row['rho']}", abs(row["v"] - exact) <= tol)
    ctx.results["speeds"] = rows

    path = ctx.csv_path("walk")
    if path:
        run = run_walk(env, levels[0], 0, min(steps, CSV_MAX_STEPS), derive_seed(ctx.seed, TAG_WALK))
        dump_run_csv(run, path)
        lo, hi = int(run.positions.min()), int(run.positions.max()) + 1
        write_dict_csv(ctx.csv_path("sites"), describe_sites(env, lo, hi))


@handler("rwre_regen")
def _rwre_regen(ctx: RunContext) -> None:
    env = ctx.environment()
    rhos = ctx.get("RHO")
    _condition_D_guard(ctx, env, rhos)
    cycles, replicas = ctx.get("CYCLES"), ctx.get("REPLICAS")
    runs, rows = [], []
    for rho in rhos:
        split = split_for(env, rho, ctx.get("LEVELS"), ctx.get("SAMPLES"), ctx.seed, ctx.threads)
        records = run_regen_replicas(env, split, cycles, replicas, ctx.seed, ctx.get("HALF_WIDTH"), ctx.threads)
        runs.append((split, records))
        merged = merge_records(records)
        cycle = speed_cycle(merged, split)
        direct = speed_direct(env, rho, ctx.get("STEPS"), replicas, ctx.seed, threads=ctx.threads)
        row = {
            "rho": split.rho.label(),
            "split": split.summary(),
            "record": merged.summary(),
            "v_cycle": cycle.summary(),
            "v_direct": direct.summary(),
            "relative_difference": relative_difference(cycle.ratio.value, direct.value),
            "within_3_sigma": within_sigma(cycle.ratio, direct),
        }
        ctx.check(f"speed_cycle_rho_{row['rho']}", row["relative_difference"] < TOL["speed_cycle_rel"])
        if replicas >= 2 and cycles >= 2:
            row["exchangeability"] = cycle_exchangeability(records, k=min(10, cycles))
            ctx.check(f"exchangeability_rho_{row['rho']}", row["exchangeability"]["passed"])
        rows.append(row)

        path = ctx.csv_path(f"cycles_rho{row['rho']}")
        if path:
            write_csv(path, ("cycle", "ell", "start_time", "end_time", "duration", "displacement"), merged.cycle_rows())
    ctx.results["speeds"] = rows

    if len(runs) > 1:
        scaling = duration_scaling(runs)
        ctx.results["duration_scaling"] = scaling
        ctx.check("duration_bracket", scaling["bracket_ratio"] < TOL["duration_bracket_ratio"])


@handler("rwre_Q")
def _rwre_Q(ctx: RunContext) -> None:
    env = ctx.environment()
    rhos = ctx.get("RHO")
    half_width = ctx.get("HALF_WIDTH")
    cycles, replicas = ctx.get("CYCLES"), ctx.get("REPLICAS")
    marginal = env_marginal(env, half_width)
    ctx.results["marginal"] = marginal.summary()
    rows, densities = [], []
    for rho in rhos:
        split = split_for(env, rho, ctx.get("LEVELS"), ctx.get("SAMPLES"), ctx.seed, ctx.threads)
        records = run_regen_replicas(env, split, cycles, replicas, ctx.seed, half_width, ctx.threads)
        occ = occupation_Q(records)
        rn = rn_density(occ, marginal)
        densities.append(rn)
        direct = occupation_direct(env, rho, ctx.get("STEPS"), replicas, ctx.seed, half_width, ctx.threads)
        row = {
            "rho": split.rho.label(),
            "eps1": split.eps1,
            "occupation": occ.summary(),
            "occupation_direct": direct.summary(),
            "tv_direct": occ.tv_distance(direct),
            "rn_density": rn.summary(),
            "v_from_occupation": speed_from_occupation(occ, env, rho),
        }
        ctx.check(f"rn_bounded_rho_{row['rho']}", rn.bounded)
        ctx.check(f"tv_direct_rho_{row['rho']}", row["tv_direct"] < TOL["occupation_tv"])
        if env.is_periodic and half_width == 0:
            exact = periodic_env_chain(env, rho)
            row["occupation_exact"] = exact.summary()
            row["tv_exact"] = occ.tv_distance(exact)
            ctx.check(f"tv_exact_rho_{row['rho']}", row["tv_exact"] < TOL["occupation_tv"])
        rows.append(row)
    ctx.results["occupations"] = rows

    if len(densities) > 1:
        a, b = densities[-2].ratios, densities[-1].ratios
        change = max((relative_difference(r, b.get(d, 0.0)) for d, r in a.items() if math.isfinite(r)), default=0.0)
        ctx.results["rn_change_last_doubling"] = change
        ctx.check("rn_change", change < TOL["rn_change"])


@handler("oracle_check")
def _oracle_check(ctx: RunContext) -> None:
    env = ctx.environment()
    x0, n = ctx.get("START"), ctx.get("SAMPLES")
    seeds = [derive_seed(ctx.seed, TAG_REPLICA, i) for i in range(n)]
    rows = []
    for rho in ctx.get("RHO"):
        bracket = exact_hit_bracket(env, rho, x0, W=ctx.get("WINDOW"))
        hits = map_replicas(lambda s: hit(env, rho, x0, 0, s, ctx.config.step_cap), seeds, ctx.threads)
        reached = [h for h in hits if h.T is not None]
        if not reached:
            raise OracleError(f"no hitting run reached level 0 from {x0} within {ctx.config.step_cap} steps")
        freq = proportion(sum(h.exact for h in reached), len(reached))
        row = {
            "rho": as_rho(rho).label(),
            "bracket": bracket.summary(),
            "frequency": freq.summary(),
            "capped": len(hits) - len(reached),
            "mean_T": mean_stderr([h.T for h in reached]).summary(),
        }
        exact_v = _exact_speed(env, rho)
        if exact_v is not None:
            row["v_exact"] = exact_v
        rows.append(row)
        ctx.results["hits"] = rows
        if not bracket.contains(freq.value, 3.0 * freq.stderr):
            raise OracleError(
                f"hit frequency {freq.value:.5f} +- {freq.stderr:.5f} outside [{bracket.lower}, {bracket.upper}]"
            )


@handler("billiard_lln")
def _billiard_lln(ctx: RunContext) -> None:
    tube_seeds = ctx.get("TUBE_SEEDS") or [ctx.seed]
    steps, replicas = ctx.get("STEPS"), ctx.get("REPLICAS")
    rows = []
    for lam in ctx.get("LAMBDA"):
        params = ctx.params(lam)
        estimates = []
        for k, ts in enumerate(tube_seeds):
            tube = ctx.tube(ts)
            walk_seed = ctx.seed if k == 0 else derive_seed(ctx.seed, TAG_BILLIARD, 100 + k)
            lln = run_lln(tube, params, steps, replicas, walk_seed, ctx.threads)
            estimates.append(lln.speed)
            row = {"lambda": lam, "tube_seed": str(ts), "tube": tube.spec(), **lln.summary()}
            if tube.constant:
                row["theta_quadrature"] = theta_cylinder_quadrature(tube.cell_radius(0), lam)
            else:
                checked = run_billiard(
                    tube, params, start_point(tube, walk_seed), min(steps, VISIBILITY_STEPS), walk_seed,
                    check_visibility=True,
                )
                row["visibility_checked_steps"] = checked.n_steps
            if lam == 0.0:
                ctx.check(f"zero_speed_lambda_0_tube_{k}", lln.zero_speed)
            else:
                ctx.check(f"positive_speed_lambda_{lam}_tube_{k}", row["positive_speed"])
            rows.append(row)

            path = ctx.csv_path(f"trajectory_lam{lam}_tube{k}")
            if path:
                run = run_billiard(tube, params, start_point(tube, walk_seed), min(steps, CSV_MAX_STEPS), walk_seed)
                dump_trajectory_csv(run, path)
            path = ctx.csv_path(f"radii_tube{k}")
            if path:
                write_csv(path, ("cell", "radius"), tube.radius_rows(-64, 64))
        if len(estimates) > 1:
            agree = all(within_sigma(a, b) for a, b in zip(estimates, estimates[1:]))
            ctx.check(f"tube_seeds_agree_lambda_{lam}", agree)
    ctx.results["lln"] = rows


@handler("billiard_balance")
def _billiard_balance(ctx: RunContext) -> None:
    tube = ctx.tube()
    n = ctx.get("SAMPLES")
    rows, bounds = [], []
    for lam in ctx.get("LAMBDA"):
        params = ctx.params(lam)
        for b1, b2 in ctx.get("BANDS"):
            res = detailed_balance_test(tube, params, b1, b2, n, ctx.seed, threads=ctx.threads)
            ctx.check(f"balance_{b1}_{b2}_lambda_{lam}", res["passed"])
            rows.append(res)
        b1, b2 = ctx.get("BANDS")[0]
        res = hitting_bound_test(tube, params, b1, b2, 4, max(1000, n // 10), ctx.seed, ctx.threads)
        ctx.check(f"hitting_bound_lambda_{lam}", res["passed"])
        bounds.append({"lambda": lam, **res})
    ctx.results["detailed_balance"] = rows
    ctx.results["hitting_bound"] = bounds


@handler("billiard_tails")
def _billiard_tails(ctx: RunContext) -> None:
    tube = ctx.tube()
    lam = ctx.get("LAMBDA")[0]
    params = ctx.params(lam)
    replicas, samples = ctx.get("REPLICAS"), ctx.get("SAMPLES")
    a, b = ctx.get("EXIT_WINDOW")

    cosine = cosine_sampler_check(samples, derive_seed(ctx.seed, TAG_BILLIARD, 20))
    ctx.results["cosine"] = cosine
    ctx.check("cosine_ks", cosine["ks_distance"] < TOL["cosine_ks"])
    ctx.check("cosine_mean", abs(cosine["mean"]["value"] - 2.0 / 3.0) < TOL["cosine_mean"])

    exit_tail = exit_time_tail(tube, params, a, b, None, replicas, ctx.seed, threads=ctx.threads)
    ctx.results["exit_time"] = exit_tail
    ratios = [r for r in exit_tail["ratios"] if not math.isnan(r)]
    ctx.check("exit_ratios", bool(ratios) and max(ratios) <= TOL["exit_ratio"] and exit_tail["monotone"])

    chords = chord_tail(tube, samples, derive_seed(ctx.seed, TAG_BILLIARD, 21))
    ctx.results["chord_tail"] = chords
    ctx.check("chord_tail_exponent", chords["exponent"] >= TOL["tail_exponent"])

    seeds = [derive_seed(ctx.seed, TAG_REPLICA, i) for i in range(min(replicas, 256))]
    runs = map_replicas(
        lambda s: run_billiard(tube, params, start_point(tube, s), ctx.get("STEPS"), s), seeds, ctx.threads
    )
    ctx.results["backtrack"] = backtrack_stat(runs, ctx.get("H_LIST"))


@handler("skeleton")
def _skeleton(ctx: RunContext) -> None:
    tube = ctx.tube()
    params = ctx.params(ctx.get("LAMBDA")[0])
    seeds = [derive_seed(ctx.seed, TAG_REPLICA, i) for i in range(ctx.get("REPLICAS"))]

    def one(s: int):
        run = run_billiard(tube, params, start_point(tube, s), ctx.get("STEPS"), s)
        return run.displacement / run.n_steps, extract_skeleton(run, params, s)

    pairs = map_replicas(one, seeds, ctx.threads)
    skeletons = [p[1] for p in pairs]
    tail = skeleton_tail(skeletons)
    skel_speed = mean_stderr([sk.speed() for sk in skeletons])
    walk_speed = mean_stderr([p[0] for p in pairs])
    markov = skeleton_markov_test(skeletons[0])
    ctx.results.update(
        {
            "params": params.summary(),
            "skeletons": [skeleton_summary(sk) for sk in skeletons],
            "increment_tail": tail,
            "transition_law": skeleton_transition_counts(skeletons[0]),
            "markov_test": markov,
            "v_skeleton": skel_speed.summary(),
            "v_walk": walk_speed.summary(),
        }
    )
    ctx.check("skeleton_tail_exponent", tail["exponent"] >= TOL["tail_exponent"])
    ctx.check("skeleton_speed", within_sigma(skel_speed, walk_speed))

    path = ctx.csv_path("skeleton")
    if path:
        write_csv(path, ("m", "time", "S"), zip(range(skeletons[0].n_points), skeletons[0].times, skeletons[0].values))


def default_report_path(cfg: ExperimentConfig, config: Config) -> str:
    return cfg.get("OUTPUT") or os.path.join(config.out_dir, f"{cfg.name()}.json")


def _ledger_start(config: Config, cfg: ExperimentConfig, version: str) -> tuple[sqlite3.Connection | None, str | None]:
    if not config.db_path:
        return None, None
    try:
        conn = connect(config.db_path)
        return conn, start_run(conn, cfg.kind, cfg.config_hash(), cfg.seed, version)
    except sqlite3.Error as e:
        logger.warning(f"Run ledger unavailable at {config.db_path}: {e}")
        return None, None


def _ledger_finish(conn: sqlite3.Connection | None, run_id: str | None, status: str, path: str) -> None:
    if conn is None or run_id is None:
        return
    try:
        finish_run(conn, run_id, status, path)
        logger.info(f"Ledger: {run_id} -> {status}")
    except sqlite3.Error as e:
        logger.warning(f"Could not update run ledger: {e}")
    finally:
        conn.close()


def run_experiment(cfg: ExperimentConfig, config: Config, report_path: str | None = None) -> RunOutcome:
    report_path = report_path or default_report_path(cfg, config)
    version = version_string()
    ctx = RunContext(cfg=cfg, config=config, report_path=report_path)
    clock = Stopwatch()
    reset_tally()
    conn, run_id = _ledger_start(config, cfg, version)
    logger.info(f"Running {cfg.kind} ({cfg.name()}) seed={cfg.seed}")

    status, exit_code, error = STATUS_OK, EXIT_OK, None
    try:
        HANDLERS[cfg.kind](ctx)
        failed = sorted(name for name, ok in ctx.checks.items() if not ok)
        if failed:
            raise DiagnosticFailure(f"checks failed: {', '.join(failed)}")
    except (DiagnosticFailure,) + DIAGNOSTIC_ERRORS as e:
        status, exit_code, error = STATUS_DIAGNOSTIC_FAILURE, EXIT_DIAGNOSTIC, f"{type(e).__name__}: {e}"
        logger.warning(f"{cfg.kind} diagnostic failure: {e}")
    except Exception as e:
        status, exit_code, error = STATUS_ERROR, EXIT_CONFIG, f"{type(e).__name__}: {e}"
        logger.error(f"{cfg.kind} failed: {e}", exc_info=True)

    results = dict(ctx.results)
    results["checks"] = dict(sorted(ctx.checks.items()))
    report = build_report(
        experiment=cfg.kind,
        version=version,
        config=cfg.echo(),
        seed=cfg.seed,
        results=results,
        status=status,
        error=error,
        invariants=tally(),
        wall_clock={"started_at": clock.started_at, "finished_at": now_iso(), "seconds": clock.elapsed()},
    )
    write_report(report_path, report)
    _ledger_finish(conn, run_id, status, report_path)
    logger.info(f"Finished {cfg.kind} with status {status} in {clock.elapsed():.1f}s")
    return RunOutcome(status=status, exit_code=exit_code, report=report, report_path=report_path, csv_paths=ctx.csv_paths)
