"""Random environments on Z and their truncation."""

from .environment import (
    ConditionReport,
    Environment,
    EnvironmentSpecError,
    build_environment,
    check_condition_C,
    check_condition_E,
    describe_sites,
    homogeneous,
)
from .jump_law import INFINITY, JumpLaw, JumpLawError, TruncationLevel, as_rho, law_from_spec, power_tail_law, truncate

__all__ = [
    "ConditionReport",
    "Environment",
    "EnvironmentSpecError",
    "build_environment",
    "check_condition_C",
    "check_condition_E",
    "describe_sites",
    "homogeneous",
    "INFINITY",
    "JumpLaw",
    "JumpLawError",
    "TruncationLevel",
    "as_rho",
    "law_from_spec",
    "power_tail_law",
    "truncate",
]
