"""Estimates with standard errors and the shared statistical tests."""

from .estimators import (
    Estimate,
    fit_tail_exponent,
    ks_distance,
    ks_two_sample,
    loglog_slope,
    mean_stderr,
    proportion,
    ratio_estimate,
    relative_difference,
    tail_survival,
    within_sigma,
)

__all__ = [
    "Estimate",
    "fit_tail_exponent",
    "ks_distance",
    "ks_two_sample",
    "loglog_slope",
    "mean_stderr",
    "proportion",
    "ratio_estimate",
    "relative_difference",
    "tail_survival",
    "within_sigma",
]
