"""Experiment runner and the built-in acceptance suites."""

from .runner import (
    EXIT_CONFIG,
    EXIT_DIAGNOSTIC,
    EXIT_OK,
    HANDLERS,
    DiagnosticFailure,
    RunOutcome,
    default_report_path,
    run_experiment,
)
from .suites import SUITES, list_suites, suite_config, suite_text, suite_values, write_suites

__all__ = [
    "EXIT_CONFIG",
    "EXIT_DIAGNOSTIC",
    "EXIT_OK",
    "HANDLERS",
    "DiagnosticFailure",
    "RunOutcome",
    "default_report_path",
    "run_experiment",
    "SUITES",
    "list_suites",
    "suite_config",
    "suite_text",
    "suite_values",
    "write_suites",
]
