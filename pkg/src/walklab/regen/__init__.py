"""Regeneration structure of the truncated walk: splitting, cycles, speeds and occupation measures."""

from .descriptors import DescriptorError, decode, descriptor_codes
from .estimators import (
    CycleSpeed,
    RNDensity,
    cycle_duration_scaling,
    cycle_exchangeability,
    duration_scaling,
    env_marginal,
    occupation_direct,
    occupation_Q,
    rn_density,
    speed_cycle,
    speed_direct,
    speed_from_occupation,
    speed_vs_rho,
    split_for,
)
from .splitting import (
    Cycle,
    DegenerateProfileError,
    RegenerationError,
    RegenRecord,
    RProfile,
    SplitParams,
    choose_eps1,
    estimate_r_profile,
    merge_records,
    run_regen_replicas,
    run_with_splitting,
)

__all__ = [
    "DescriptorError",
    "decode",
    "descriptor_codes",
    "CycleSpeed",
    "RNDensity",
    "cycle_duration_scaling",
    "cycle_exchangeability",
    "duration_scaling",
    "env_marginal",
    "occupation_direct",
    "occupation_Q",
    "rn_density",
    "speed_cycle",
    "speed_direct",
    "speed_from_occupation",
    "speed_vs_rho",
    "split_for",
    "Cycle",
    "DegenerateProfileError",
    "RegenerationError",
    "RegenRecord",
    "RProfile",
    "SplitParams",
    "choose_eps1",
    "estimate_r_profile",
    "merge_records",
    "run_regen_replicas",
    "run_with_splitting",
]
