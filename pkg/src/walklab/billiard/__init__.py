# src/walklab/billiard/__init__.py
"""Knudsen random walk with drift in a random tube, and its diagnostics."""

from .diagnostics import (
    BandError,
    backtrack_stat,
    chord_axial_lengths,
    chord_tail,
    detailed_balance_test,
    exit_time_tail,
    hitting_bound_test,
    pi_mass,
    sample_weighted_start,
)
from .kernel import (
    BilliardParams,
    BilliardParamsError,
    Proposal,
    accept_probability,
    cosine_constant,
    cosine_direction,
    cosine_sampler_check,
    estimate_theta,
    sample_cosine,
    step,
    theta_cylinder_quadrature,
)
from .run import BilliardRun, LLNResult, check_run, dump_trajectory_csv, run_billiard, run_lln, start_point
from .skeleton import (
    Skeleton,
    SkeletonError,
    extract_skeleton,
    skeleton_markov_test,
    skeleton_summary,
    skeleton_tail,
    skeleton_transition_counts,
)

__all__ = [
    "BandError",
    "backtrack_stat",
    "chord_axial_lengths",
    "chord_tail",
    "detailed_balance_test",
    "exit_time_tail",
    "hitting_bound_test",
    "pi_mass",
    "sample_weighted_start",
    "BilliardParams",
    "BilliardParamsError",
    "Proposal",
    "accept_probability",
    "cosine_constant",
    "cosine_direction",
    "cosine_sampler_check",
    "estimate_theta",
    "sample_cosine",
    "step",
    "theta_cylinder_quadrature",
    "BilliardRun",
    "LLNResult",
    "check_run",
    "dump_trajectory_csv",
    "run_billiard",
    "run_lln",
    "start_point",
    "Skeleton",
    "SkeletonError",
    "extract_skeleton",
    "skeleton_markov_test",
    "skeleton_summary",
    "skeleton_tail",
    "skeleton_transition_counts",
]
