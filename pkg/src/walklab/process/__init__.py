# src/walklab/process/__init__.py
"""Stationary finite-state drivers shared by random environments and random tubes."""

from .drivers import (
    ConstantDriver,
    Driver,
    DriverSpecError,
    IidDriver,
    MarkovDriver,
    PeriodicDriver,
    build_driver,
)
from .linalg import is_irreducible, stationary_distribution, time_reversal
from .sequence import StateSequence

__all__ = [
    "ConstantDriver",
    "Driver",
    "DriverSpecError",
    "IidDriver",
    "MarkovDriver",
    "PeriodicDriver",
    "build_driver",
    "is_irreducible",
    "stationary_distribution",
    "time_reversal",
    "StateSequence",
]
