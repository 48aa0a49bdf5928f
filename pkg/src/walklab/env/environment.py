# src/walklab/env/environment.py
"""One-dimensional random environments: a driver picks a state per site, each state owns a jump law."""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from walklab.env.jump_law import DEFAULT_MAX_JUMP, JumpLaw, JumpLawError, law_from_spec
from walklab.process import Driver, DriverSpecError, PeriodicDriver, StateSequence, build_driver

logger = logging.getLogger(__name__)

# relative slack when comparing a tail mass against gamma1 * s**-alpha
TAIL_REL_TOL = 1e-12


class EnvironmentSpecError(ValueError):
    pass


@dataclass(frozen=True)
class ConditionReport:
    condition: str
    scanned: int
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def summary(self) -> dict[str, Any]:
        return {
            "condition": self.condition,
            "scanned": self.scanned,
            "passed": self.passed,
            "n_failures": len(self.failures),
            "first_failures": [list(f) if isinstance(f, tuple) else f for f in self.failures[:10]],
        }


class Environment:
    """
    Quenched environment omega for one seed.

    Site laws are never stored per site: the state sequence is cached lazily and the
    law at ``x`` is ``laws[state(x)]``, so the same (driver, laws, seed, site) always
    gives the same JumpLaw object.
    """

    def __init__(
        self,
        driver: Driver,
        laws: tuple[JumpLaw, ...],
        seed: int,
        declared: Mapping[str, float] | None = None,
    ) -> None:
        if len(laws) != driver.n_states:
            raise EnvironmentSpecError(f"{len(laws)} laws for a driver with {driver.n_states} states")
        self.driver = driver
        self.laws = tuple(laws)
        self.seed = int(seed)
        self.declared = dict(declared or {})
        self._sequence = StateSequence(driver, self.seed)

    @property
    def n_states(self) -> int:
        return len(self.laws)

    @property
    def max_offset(self) -> int:
        return max(law.max_offset for law in self.laws)

    @property
    def is_periodic(self) -> bool:
        return isinstance(self.driver, PeriodicDriver)

    def state_at(self, site: int) -> int:
        return self._sequence.state_at(int(site))

    def states(self, lo: int, hi: int) -> np.ndarray:
        """Driver states at sites ``lo .. hi-1``."""
        return self._sequence.window(int(lo), int(hi))

    def law_at(self, site: int) -> JumpLaw:
        return self.laws[self.state_at(site)]

    def descriptor(self, site: int, half_width: int = 0) -> tuple[int, ...]:
        """Local environment seen from ``site``: the driver states on ``site-w .. site+w``."""
        return tuple(int(s) for s in self.states(site - half_width, site + half_width + 1))

    def mean_drift(self) -> np.ndarray:
        """One-step mean displacement per state (untruncated)."""
        return np.array([law.mean() for law in self.laws])

    def spec(self) -> dict[str, Any]:
        out = dict(self.driver.spec())
        out["laws"] = [law.spec() for law in self.laws]
        for key in ("epsilon_tilde", "gamma1", "alpha"):
            if key in self.declared:
                out[key] = self.declared[key]
        return out

    def environment_hash(self) -> str:
        blob = json.dumps({"spec": self.spec(), "seed": self.seed}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def shifted(self, shift: int) -> "Environment":
        """theta_shift omega for periodic drivers: the law at x becomes the law at x + shift."""
        if not self.is_periodic:
            raise EnvironmentSpecError("only periodic environments can be shifted in place")
        p = self.n_states
        laws = tuple(self.laws[(i + shift) % p] for i in range(p))
        return Environment(self.driver, laws, self.seed, self.declared)

    def __repr__(self) -> str:
        return f"Environment(driver={self.driver.kind}, states={self.n_states}, seed={self.seed})"


def build_environment(spec: Mapping[str, Any], seed: int, max_jump: int = DEFAULT_MAX_JUMP) -> Environment:
    """
    Build an environment from its spec dict.

    ``spec`` holds ``driver`` (constant, iid, markov, periodic), ``laws`` (one entry per
    driver state), driver options (``weights``, ``transition``, ``random_phase``) and the
    optional declared parameters ``epsilon_tilde``, ``gamma1``, ``alpha``, which every
    law must satisfy.
    """
    if not isinstance(spec, Mapping):
        raise EnvironmentSpecError(f"environment spec must be a mapping, got {type(spec).__name__}")
    raw_laws = spec.get("laws")
    if raw_laws is None and "law" in spec:
        raw_laws = [spec["law"]]
    if not raw_laws:
        raise EnvironmentSpecError("environment spec needs a non-empty 'laws' list")

    max_jump = int(spec.get("max_jump", max_jump))
    try:
        laws = tuple(law_from_spec(entry, max_jump) for entry in raw_laws)
    except (JumpLawError, KeyError, TypeError) as e:
        raise EnvironmentSpecError(f"invalid law in environment spec: {e}") from e

    driver_spec = dict(spec)
    driver_spec.setdefault("driver", "iid" if len(laws) == 1 else "periodic")
    try:
        driver = build_driver(driver_spec, len(laws))
    except DriverSpecError as e:
        raise EnvironmentSpecError(str(e)) from e

    declared = {k: float(spec[k]) for k in ("epsilon_tilde", "gamma1", "alpha") if spec.get(k) is not None}
    _check_declared(laws, declared)
    env = Environment(driver, laws, seed, declared)
    logger.debug(f"Built {env!r}")
    return env


def _check_declared(laws: tuple[JumpLaw, ...], declared: Mapping[str, float]) -> None:
    eps = declared.get("epsilon_tilde")
    if eps is not None:
        for i, law in enumerate(laws):
            if law.prob(1) < eps:
                raise EnvironmentSpecError(
                    f"law {i} violates Condition E: P[Y=+1]={law.prob(1)} < epsilon_tilde={eps}"
                )

    gamma1, alpha = declared.get("gamma1"), declared.get("alpha")
    if (gamma1 is None) != (alpha is None):
        raise EnvironmentSpecError("declare gamma1 and alpha together")
    for i, law in enumerate(laws):
        g, a = gamma1, alpha
        if g is None and law.tail_coeff is not None and law.tail_exponent is not None:
            g, a = law.tail_coeff, law.tail_exponent
        if g is None:
            continue
        if a <= 1.0 or g <= 0.0:
            raise EnvironmentSpecError(f"Condition C needs alpha > 1 and gamma1 > 0, got {g}, {a}")
        bad = _tail_violations(law, g, a)
        if bad:
            raise EnvironmentSpecError(
                f"law {i} violates Condition C at s={bad[0]}: tail {law.tail_mass(bad[0])} > {g}*s^-{a}"
            )


def _tail_violations(law: JumpLaw, gamma1: float, alpha: float) -> list[int]:
    return [
        s
        for s in range(1, law.max_jump + 1)
        if law.tail_mass(s) > gamma1 * s ** (-alpha) * (1.0 + TAIL_REL_TOL)
    ]


def _site_range(sites) -> np.ndarray:
    if isinstance(sites, range):
        return np.arange(sites.start, sites.stop, sites.step or 1)
    if isinstance(sites, tuple) and len(sites) == 2:
        lo, hi = sites
        return np.arange(int(lo), int(hi) + 1)
    return np.asarray(sites, dtype=np.int64)


def _site_states(env: Environment, sites: np.ndarray) -> np.ndarray:
    if len(sites) == 0:
        return np.empty(0, dtype=np.int32)
    lo, hi = int(sites.min()), int(sites.max()) + 1
    return env.states(lo, hi)[sites - lo]


def check_condition_E(env: Environment, epsilon_tilde: float, sites) -> ConditionReport:
    """
    Scan ``sites`` (a ``(lo, hi)`` pair, inclusive, or an iterable) for ``omega_{x,1} < epsilon_tilde``.
    """
    sites = _site_range(sites)
    p_plus = np.array([law.prob(1) for law in env.laws])
    states = _site_states(env, sites)
    failing = sites[p_plus[states] < epsilon_tilde]
    return ConditionReport("E", len(sites), [int(x) for x in failing])


def check_condition_C(env: Environment, gamma1: float, alpha: float, sites) -> ConditionReport:
    """List ``(site, s)`` pairs whose tail mass at ``|y| >= s`` exceeds ``gamma1 * s**-alpha``."""
    if alpha <= 1.0 or gamma1 <= 0.0:
        raise ValueError(f"need alpha > 1 and gamma1 > 0, got alpha={alpha}, gamma1={gamma1}")
    sites = _site_range(sites)
    per_state = [_tail_violations(law, gamma1, alpha) for law in env.laws]
    states = _site_states(env, sites)
    failures = [(int(x), s) for x, st in zip(sites.tolist(), states.tolist()) for s in per_state[st]]
    return ConditionReport("C", len(sites), failures)


def describe_sites(env: Environment, lo: int, hi: int) -> list[dict[str, Any]]:
    """Rows (site, state, P[+1], mean jump) for a CSV dump of ``lo .. hi-1``."""
    states = env.states(lo, hi)
    return [
        {
            "site": site,
            "state": int(st),
            "p_plus_one": env.laws[st].prob(1),
            "mean_jump": env.laws[st].mean(),
        }
        for site, st in zip(range(lo, hi), states.tolist())
    ]


def homogeneous(jumps: Mapping[int, float], seed: int = 0, max_jump: int = DEFAULT_MAX_JUMP) -> Environment:
    """Single-law environment; handy for tests and oracles."""
    return build_environment({"driver": "iid", "laws": [{"jumps": dict(jumps)}], "max_jump": max_jump}, seed)
