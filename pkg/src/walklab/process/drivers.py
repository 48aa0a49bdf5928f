# src/walklab/process/drivers.py
"""Stationary finite-state drivers indexed by the integers.

A driver only says which state sits at each site (or tube cell). What a state
means (a jump law, a tube radius) is decided by the caller.
"""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from walklab.process.linalg import check_stochastic, is_irreducible, stationary_distribution, time_reversal
from walklab.utils.seeding import TAG_PHASE, TAG_SITE, site_uniforms

DRIVER_KINDS = ("constant", "iid", "markov", "periodic")


class DriverSpecError(ValueError):
    pass


@dataclass(frozen=True)
class Driver:
    """Base class; concrete drivers below."""

    kind: str = field(init=False, default="")

    @property
    def n_states(self) -> int:
        raise NotImplementedError

    @property
    def sequential(self) -> bool:
        """True when the state at a site depends on its neighbours."""
        return False

    def stationary(self) -> np.ndarray:
        raise NotImplementedError

    def window_probability(self, states: tuple[int, ...]) -> float:
        raise NotImplementedError

    def direct_states(self, seed: int, sites: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def spec(self) -> dict[str, Any]:
        raise NotImplementedError

    def window_support(self, half_width: int) -> list[tuple[int, ...]]:
        """All windows of length 2w+1 with positive stationary probability."""
        size = 2 * half_width + 1
        return [
            combo
            for combo in itertools.product(range(self.n_states), repeat=size)
            if self.window_probability(combo) > 0.0
        ]


@dataclass(frozen=True)
class ConstantDriver(Driver):
    kind: str = field(init=False, default="constant")

    @property
    def n_states(self) -> int:
        return 1

    def stationary(self) -> np.ndarray:
        return np.ones(1)

    def window_probability(self, states: tuple[int, ...]) -> float:
        return 1.0 if all(s == 0 for s in states) else 0.0

    def direct_states(self, seed: int, sites: np.ndarray) -> np.ndarray:
        return np.zeros(len(sites), dtype=np.int32)

    def spec(self) -> dict[str, Any]:
        return {"driver": "constant"}


@dataclass(frozen=True)
class IidDriver(Driver):
    weights: tuple[float, ...] = (1.0,)
    kind: str = field(init=False, default="iid")

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or len(w) < 1 or np.any(w < 0.0) or not math.isclose(w.sum(), 1.0, abs_tol=1e-12):
            raise DriverSpecError(f"iid weights must be a probability vector, got {self.weights}")

    @property
    def n_states(self) -> int:
        return len(self.weights)

    def stationary(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)

    def window_probability(self, states: tuple[int, ...]) -> float:
        return float(np.prod([self.weights[s] for s in states]))

    def direct_states(self, seed: int, sites: np.ndarray) -> np.ndarray:
        if self.n_states == 1:
            return np.zeros(len(sites), dtype=np.int32)
        cum = np.cumsum(self.weights)[:-1]
        u = site_uniforms(seed, sites, TAG_SITE)
        return np.searchsorted(cum, u, side="right").astype(np.int32)

    def spec(self) -> dict[str, Any]:
        return {"driver": "iid", "weights": list(self.weights)}


@dataclass(frozen=True)
class PeriodicDriver(Driver):
    period: int = 1
    random_phase: bool = False
    kind: str = field(init=False, default="periodic")

    def __post_init__(self) -> None:
        if self.period < 1:
            raise DriverSpecError(f"period must be >= 1, got {self.period}")

    @property
    def n_states(self) -> int:
        return self.period

    def phase(self, seed: int) -> int:
        if not self.random_phase:
            return 0
        return int(site_uniforms(seed, [0], TAG_PHASE)[0] * self.period) % self.period

    def stationary(self) -> np.ndarray:
        return np.full(self.period, 1.0 / self.period)

    def window_probability(self, states: tuple[int, ...]) -> float:
        for a, b in zip(states, states[1:]):
            if b != (a + 1) % self.period:
                return 0.0
        return 1.0 / self.period

    def direct_states(self, seed: int, sites: np.ndarray) -> np.ndarray:
        return np.mod(np.asarray(sites, dtype=np.int64) + self.phase(seed), self.period).astype(np.int32)

    def spec(self) -> dict[str, Any]:
        return {"driver": "periodic", "random_phase": self.random_phase}


@dataclass(frozen=True, eq=False)
class MarkovDriver(Driver):
    """
    Stationary Markov chain along the line.

    Site 0 is drawn from the stationary law, sites to the right follow the chain,
    sites to the left follow its time reversal, which gives a two-sided stationary
    sequence anchored at 0.
    """

    transition: tuple[tuple[float, ...], ...] = ((1.0,),)
    kind: str = field(init=False, default="markov")

    def __post_init__(self) -> None:
        try:
            p = check_stochastic(self.transition)
        except ValueError as e:
            raise DriverSpecError(str(e)) from e
        if not is_irreducible(p):
            raise DriverSpecError("markov driver transition matrix is reducible")
        pi = stationary_distribution(p)
        rev = time_reversal(p, pi)
        object.__setattr__(self, "_P", p)
        object.__setattr__(self, "_pi", pi)
        object.__setattr__(self, "_cum_pi", np.cumsum(pi)[:-1].tolist())
        object.__setattr__(self, "_cum_fwd", [np.cumsum(row)[:-1].tolist() for row in p])
        object.__setattr__(self, "_cum_bwd", [np.cumsum(row)[:-1].tolist() for row in rev])

    def __eq__(self, other: object) -> bool:
        return isinstance(other, MarkovDriver) and self.transition == other.transition

    def __hash__(self) -> int:
        return hash(("markov", self.transition))

    @property
    def n_states(self) -> int:
        return len(self.transition)

    @property
    def sequential(self) -> bool:
        return True

    @property
    def matrix(self) -> np.ndarray:
        return self._P

    def stationary(self) -> np.ndarray:
        return self._pi.copy()

    def window_probability(self, states: tuple[int, ...]) -> float:
        prob = float(self._pi[states[0]])
        for a, b in zip(states, states[1:]):
            prob *= float(self._P[a, b])
        return prob

    def first_state(self, u: float) -> int:
        return bisect.bisect_right(self._cum_pi, u)

    def forward(self, prev: int, uniforms) -> list[int]:
        out = []
        for u in uniforms:
            prev = bisect.bisect_right(self._cum_fwd[prev], u)
            out.append(prev)
        return out

    def backward(self, nxt: int, uniforms) -> list[int]:
        out = []
        for u in uniforms:
            nxt = bisect.bisect_right(self._cum_bwd[nxt], u)
            out.append(nxt)
        return out

    def spec(self) -> dict[str, Any]:
        return {"driver": "markov", "transition": [list(row) for row in self.transition]}


def build_driver(spec: dict[str, Any], n_states: int) -> Driver:
    """Build a driver for ``n_states`` payload entries from its spec dict."""
    kind = spec.get("driver")
    if kind not in DRIVER_KINDS:
        raise DriverSpecError(f"unknown driver {kind!r}; expected one of {DRIVER_KINDS}")

    if kind == "constant":
        if n_states != 1:
            raise DriverSpecError(f"constant driver takes exactly one state, got {n_states}")
        return ConstantDriver()

    if kind == "iid":
        weights = spec.get("weights")
        if weights is None:
            weights = [1.0 / n_states] * n_states
        if len(weights) != n_states:
            raise DriverSpecError(f"iid driver has {len(weights)} weights for {n_states} states")
        return IidDriver(weights=tuple(float(w) for w in weights))

    if kind == "periodic":
        return PeriodicDriver(period=n_states, random_phase=bool(spec.get("random_phase", False)))

    transition = spec.get("transition")
    if transition is None:
        raise DriverSpecError("markov driver needs a 'transition' matrix")
    if len(transition) != n_states:
        raise DriverSpecError(f"markov transition has {len(transition)} rows for {n_states} states")
    return MarkovDriver(transition=tuple(tuple(float(x) for x in row) for row in transition))
