"""Exact ground truth on finite windows and periodic environments."""

from .exact import (
    ExactHitBracket,
    FiniteChain,
    OracleError,
    exact_hit_bracket,
    fundamental_visits,
    green_function_nn,
    solve_exact_hit,
    windowed_chain,
)
from .periodic import periodic_env_chain, periodic_speed, phase_chain

__all__ = [
    "ExactHitBracket",
    "FiniteChain",
    "OracleError",
    "exact_hit_bracket",
    "fundamental_visits",
    "green_function_nn",
    "solve_exact_hit",
    "windowed_chain",
    "periodic_env_chain",
    "periodic_speed",
    "phase_chain",
]
