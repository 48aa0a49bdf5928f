# src/walklab/utils/seeding.py
"""Seed streams.

Every random quantity in walklab is reproducible from one 64-bit master seed.

* Replica and sub-task streams come from ``derive_seed(master, *path)``: the path is
  used as the ``spawn_key`` of a ``numpy.random.SeedSequence`` rooted at the master
  seed. Two different paths never share a stream, and the derived value does not
  depend on how many other streams were derived before it (counter-based split).
* Generators are ``numpy.random.Generator(numpy.random.Philox(...))``.
* Site-level quantities (the environment at site ``x``, the tube radius in cell ``i``)
  use ``site_uniforms(seed, sites, tag)``, a vectorized splitmix64 hash of
  ``(seed, tag, site)``. Any site can be evaluated on its own.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

# stream tags, kept stable across releases
TAG_WALK = 1
TAG_COUPLING = 2
TAG_ZETA = 3
TAG_REPLICA = 4
TAG_SITE = 5
TAG_PHASE = 6
TAG_BILLIARD = 7
TAG_SKELETON = 8


def check_seed(seed: int) -> int:
    seed = int(seed)
    if seed < 0 or seed > MASK64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def derive_seed(master: int, *path: int) -> int:
    """Derive a 64-bit seed for the stream identified by ``path``."""
    seq = np.random.SeedSequence(check_seed(master), spawn_key=tuple(int(p) & MASK64 for p in path))
    lo, hi = seq.generate_state(2, dtype=np.uint32)
    return (int(hi) << 32) | int(lo)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(check_seed(seed))))


def replica_seeds(master: int, n_replicas: int, tag: int = TAG_REPLICA) -> list[int]:
    return [derive_seed(master, tag, i) for i in range(n_replicas)]


def _splitmix64(x: np.ndarray) -> np.ndarray:
    x = x + np.uint64(0x9E3779B97F4A7C15)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def site_uniforms(seed: int, sites, tag: int = TAG_SITE) -> np.ndarray:
    """Uniform(0,1) values keyed by ``(seed, tag, site)``; deterministic per site."""
    sites = np.atleast_1d(np.asarray(sites, dtype=np.int64)).astype(np.uint64)
    with np.errstate(over="ignore"):
        key = _splitmix64(np.array([check_seed(seed) ^ ((int(tag) * 0xD1B54A32D192ED03) & MASK64)], dtype=np.uint64))
        h = _splitmix64(sites ^ key)
        h = _splitmix64(h + key)
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)
