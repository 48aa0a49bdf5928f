# src/walklab/utils/__init__.py
"""Logging, seed streams, worker pool and report metadata helpers."""

from .invariants import InvariantViolation, require
from .logging import setup_logging
from .pool import map_replicas, set_default_threads
from .seeding import derive_seed, make_rng, replica_seeds, site_uniforms

__all__ = [
    "InvariantViolation",
    "require",
    "setup_logging",
    "map_replicas",
    "set_default_threads",
    "derive_seed",
    "make_rng",
    "replica_seeds",
    "site_uniforms",
]
