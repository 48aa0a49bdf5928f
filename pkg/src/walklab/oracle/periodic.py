# src/walklab/oracle/periodic.py
"""Periodic environments: the environment seen from the walker is a finite phase chain."""

from __future__ import annotations

import logging

import numpy as np

from walklab.env import Environment, JumpLaw, as_rho, truncate
from walklab.models.occupation import EnvOccupation
from walklab.oracle.exact import FiniteChain, OracleError
from walklab.process import is_irreducible, stationary_distribution

logger = logging.getLogger(__name__)


def _law_key(law: JumpLaw) -> tuple:
    return (law.offsets, law.probs)


def _canonical_shift(laws: list[JumpLaw]) -> int:
    """Rotation that puts the law sequence in lexicographically smallest order."""
    p = len(laws)
    keys = [_law_key(law) for law in laws]
    return min(range(p), key=lambda r: [keys[(i + r) % p] for i in range(p)])


def phase_chain(env: Environment, rho) -> FiniteChain:
    """Phase of the walker's site, mod the period, under the truncated laws."""
    if not (env.is_periodic or env.n_states == 1):
        raise OracleError(f"phase chain needs a periodic environment, got driver {env.driver.kind}")
    level = as_rho(rho)
    p = env.n_states
    laws = [truncate(law, level) for law in env.laws]
    P = np.zeros((p, p))
    for s, law in enumerate(laws):
        for y, q in zip(law.offsets, law.probs):
            P[s, (s + y) % p] += q
    return FiniteChain(states=tuple(range(p)), transition=P)


def _phase_stationary(env: Environment, rho) -> np.ndarray:
    chain = phase_chain(env, rho)
    if not is_irreducible(chain.transition):
        raise OracleError("phase chain is reducible")

    # solve in a canonical labelling so shifted copies of the same environment give identical bits
    p = env.n_states
    r = _canonical_shift([truncate(law, as_rho(rho)) for law in env.laws])
    perm = [(i + r) % p for i in range(p)]
    P_canon = chain.transition[np.ix_(perm, perm)]
    try:
        pi_canon = stationary_distribution(P_canon)
    except ValueError as e:
        raise OracleError(str(e)) from e
    pi = np.empty(p)
    pi[perm] = pi_canon
    return pi


def periodic_speed(env: Environment, rho) -> float:
    """v = sum_i pi_i * (mean truncated step in phase i)."""
    level = as_rho(rho)
    pi = _phase_stationary(env, level)
    drift = np.array([truncate(law, level).mean() for law in env.laws])
    r = _canonical_shift([truncate(law, level) for law in env.laws])
    order = [(i + r) % env.n_states for i in range(env.n_states)]
    v = float(np.dot(pi[order], drift[order]))
    logger.debug(f"periodic_speed(rho={level}) = {v}")
    return v


def periodic_env_chain(env: Environment, rho) -> EnvOccupation:
    """Exact stationary law of the phase seen from the walker."""
    pi = _phase_stationary(env, rho)
    return EnvOccupation(
        support=tuple((s,) for s in range(env.n_states)),
        weights=pi / pi.sum(),
        meta={"source": "phase_chain", "rho": as_rho(rho).label()},
    )
