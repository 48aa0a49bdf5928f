# src/walklab/oracle/exact.py
"""Exact linear solves on finite windows of the quenched chain."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import linalg

from walklab.env import Environment, JumpLaw, as_rho, truncate

logger = logging.getLogger(__name__)

ROW_TOL = 1e-12
RESIDUAL_TOL = 1e-9
BRACKET_TOL = 1e-6
MAX_WINDOW = 4096


class OracleError(RuntimeError):
    pass


@dataclass(frozen=True)
class FiniteChain:
    states: tuple
    transition: np.ndarray
    absorbing: frozenset = frozenset()

    def __post_init__(self) -> None:
        p = np.asarray(self.transition, dtype=float)
        n = len(self.states)
        if p.shape != (n, n):
            raise ValueError(f"transition shape {p.shape} does not match {n} states")
        if np.any(p < 0.0) or not np.allclose(p.sum(axis=1), 1.0, rtol=0.0, atol=ROW_TOL):
            raise ValueError("transition rows must be probability vectors")
        index = {s: i for i, s in enumerate(self.states)}
        for s in self.absorbing:
            row = p[index[s]]
            if row[index[s]] != 1.0:
                raise ValueError(f"absorbing state {s!r} must have an identity row")
        object.__setattr__(self, "transition", p)

    @property
    def transient(self) -> list[int]:
        return [i for i, s in enumerate(self.states) if s not in self.absorbing]


@dataclass(frozen=True)
class ExactHitBracket:
    x0: int
    W: int
    lower: float
    upper: float
    residual: float
    exact: bool = False
    history: list[dict[str, Any]] = field(default_factory=list, compare=False)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= value <= self.upper + slack

    def summary(self) -> dict[str, Any]:
        return {
            "x0": self.x0,
            "W": self.W,
            "lower": self.lower,
            "upper": self.upper,
            "width": self.width,
            "residual": self.residual,
            "exact": self.exact,
            "history": self.history,
        }


def _certified_solve(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, float]:
    try:
        x = linalg.solve(a, b)
    except linalg.LinAlgError as e:
        raise OracleError(f"singular transient block: {e}") from e
    residual = float(np.max(np.abs(a @ x - b))) if len(b) else 0.0
    if not np.isfinite(residual) or residual >= RESIDUAL_TOL:
        raise OracleError(f"solve not certified: residual {residual:.3e}")
    return x, residual


def _window_laws(env: Environment, rho, lo: int, hi: int) -> list[JumpLaw]:
    """Truncated laws at sites ``lo .. hi`` (inclusive)."""
    level = as_rho(rho)
    truncated = [truncate(law, level) for law in env.laws]
    return [truncated[s] for s in env.states(lo, hi + 1).tolist()]


def _overshoot_possible(env: Environment, rho) -> bool:
    m = env.max_offset
    laws = _window_laws(env, rho, -m, -1)
    for x, law in zip(range(-m, 0), laws):
        if any(x + y >= 1 for y in law.offsets):
            return True
    return False


def solve_exact_hit(env: Environment, rho, W: int, x0: int) -> ExactHitBracket:
    """
    Bracket r_x0(0) = P[S at the first time it is >= 0 equals 0] on the window [-W, 0].

    Leaving the window to the left counts as a miss for the lower bound and as a hit
    for the upper bound. The upper bound absorbs at -W in place of reflecting there;
    a reflected walk still hits or misses 0 later, so [lower, upper] brackets it too.
    When no site can jump past 0, both bounds are exactly 1.
    """
    level = as_rho(rho)
    rho_eff = level.effective(env.max_offset)
    if W < rho_eff:
        raise OracleError(f"window W={W} smaller than rho={rho_eff}")
    if not -W <= x0 <= -1:
        raise OracleError(f"x0={x0} outside [-W, -1] = [{-W}, -1]")

    if not _overshoot_possible(env, level):
        return ExactHitBracket(x0=x0, W=W, lower=1.0, upper=1.0, residual=0.0, exact=True)

    n = W
    laws = _window_laws(env, level, -W, -1)
    a = np.eye(n)
    b_hit = np.zeros(n)
    b_left = np.zeros(n)
    for i, (x, law) in enumerate(zip(range(-W, 0), laws)):
        for y, p in zip(law.offsets, law.probs):
            d = x + y
            if d == 0:
                b_hit[i] += p
            elif d < -W:
                b_left[i] += p
            elif d < 0:
                a[i, d + W] -= p

    lower, res_lo = _certified_solve(a, b_hit)
    upper, res_hi = _certified_solve(a, b_hit + b_left)
    i0 = x0 + W
    lo, hi = float(np.clip(lower[i0], 0.0, 1.0)), float(np.clip(upper[i0], 0.0, 1.0))
    return ExactHitBracket(x0=x0, W=W, lower=lo, upper=max(lo, hi), residual=max(res_lo, res_hi))


def exact_hit_bracket(
    env: Environment, rho, x0: int, W: int | None = None, tol: float = BRACKET_TOL, max_window: int = MAX_WINDOW
) -> ExactHitBracket:
    """Double the window from ``W`` (default: rho, or -x0 if larger) until the bracket width drops below ``tol``."""
    level = as_rho(rho)
    W = max(W or 0, level.effective(env.max_offset), -x0)
    history: list[dict[str, Any]] = []
    while True:
        bracket = solve_exact_hit(env, level, W, x0)
        history.append({"W": W, "lower": bracket.lower, "upper": bracket.upper})
        if bracket.width < tol or 2 * W > max_window:
            break
        W *= 2
    if bracket.width >= tol:
        logger.warning(f"exact-hit bracket width {bracket.width:.2e} at W={W} (cap {max_window})")
    return ExactHitBracket(
        x0=x0,
        W=W,
        lower=bracket.lower,
        upper=bracket.upper,
        residual=bracket.residual,
        exact=bracket.exact,
        history=history,
    )


def windowed_chain(env: Environment, rho, lo: int, hi: int) -> FiniteChain:
    """Sites ``lo .. hi`` plus two absorbing states ``"left"`` and ``"right"`` for jumps out of the window."""
    laws = _window_laws(env, rho, lo, hi)
    n = hi - lo + 1
    p = np.zeros((n + 2, n + 2))
    for i, law in enumerate(laws):
        x = lo + i
        for y, q in zip(law.offsets, law.probs):
            d = x + y
            if d < lo:
                p[i, n] += q
            elif d > hi:
                p[i, n + 1] += q
            else:
                p[i, d - lo] += q
    p[n, n] = 1.0
    p[n + 1, n + 1] = 1.0
    states = tuple(range(lo, hi + 1)) + ("left", "right")
    return FiniteChain(states=states, transition=p, absorbing=frozenset({"left", "right"}))


def fundamental_visits(env: Environment, rho, window: tuple[int, int], x0: int) -> dict[int, float]:
    """
    Expected visits to each site of ``window`` (inclusive) before leaving it, from ``x0``.

    Row ``x0`` of the fundamental matrix (I - Q)^-1 of the transient block.
    """
    lo, hi = int(window[0]), int(window[1])
    if not lo <= x0 <= hi:
        raise OracleError(f"x0={x0} outside window [{lo}, {hi}]")
    chain = windowed_chain(env, rho, lo, hi)
    idx = chain.transient
    q = chain.transition[np.ix_(idx, idx)]
    e = np.zeros(len(idx))
    e[x0 - lo] = 1.0
    visits, _ = _certified_solve((np.eye(len(idx)) - q).T, e)
    if np.any(visits < -RESIDUAL_TOL):
        raise OracleError("negative expected visits; window chain is not transient")
    return {lo + i: float(max(v, 0.0)) for i, v in enumerate(visits)}


def green_function_nn(p: float, q: float, k: int) -> float:
    """Expected visits to -k from 0 of the nearest-neighbour walk with p > q: (q/p)^k / (p - q)."""
    if not (0.0 < q < p and p + q <= 1.0):
        raise ValueError(f"need 0 < q < p and p + q <= 1, got p={p}, q={q}")
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    return (q / p) ** k / (p - q)
