"""Simulation of the truncated walk S^rho and its diagnostics."""

from .alias import AliasTable, alias_setup
from .transience import (
    ConditionDError,
    ConditionDEstimate,
    choose_rho0,
    condition_D_scan,
    estimate_condition_D,
    one_step_chi_square,
)
from .walker import (
    DEFAULT_STEP_CAP,
    HitRecord,
    StepKernel,
    VisitCounts,
    WalkRun,
    check_truncation,
    dump_run_csv,
    final_positions,
    hit,
    run_coupled,
    run_walk,
    visit_counts,
)

__all__ = [
    "AliasTable",
    "alias_setup",
    "ConditionDError",
    "ConditionDEstimate",
    "choose_rho0",
    "condition_D_scan",
    "estimate_condition_D",
    "one_step_chi_square",
    "DEFAULT_STEP_CAP",
    "HitRecord",
    "StepKernel",
    "VisitCounts",
    "WalkRun",
    "check_truncation",
    "dump_run_csv",
    "final_positions",
    "hit",
    "run_coupled",
    "run_walk",
    "visit_counts",
]
