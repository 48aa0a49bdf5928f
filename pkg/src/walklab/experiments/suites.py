# src/walklab/experiments/suites.py
"""Built-in acceptance suites: one experiment config per acceptance criterion, keyed by a stable id."""

from __future__ import annotations

import logging
import os
from typing import Any

from walklab.models.experiment import ConfigError, ExperimentConfig, parse_experiment, render_experiment, render_value

logger = logging.getLogger(__name__)

HOMOGENEOUS = {"driver": "iid", "laws": [{"jumps": {"1": 0.6, "-1": 0.4}}]}
MIXED = {"driver": "iid", "laws": [{"jumps": {"1": 0.5, "2": 0.5}}]}
PERIOD_3 = {
    "driver": "periodic",
    "laws": [
        {"jumps": {"-1": 0.3, "1": 0.5, "2": 0.2}},
        {"jumps": {"-1": 0.5, "1": 0.3, "2": 0.2}},
        {"jumps": {"-1": 0.3, "1": 0.6, "2": 0.1}},
    ],
}
MARKOV_2 = {
    "driver": "markov",
    "transition": [[0.8, 0.2], [0.3, 0.7]],
    "laws": [
        {"jumps": {"-1": 0.3, "1": 0.7}},
        {"jumps": {"-1": 0.4, "1": 0.4, "2": 0.2}},
    ],
}
POWER_TAIL = {
    "driver": "iid",
    "laws": [{"power_tail": {"base": {"1": 0.6, "-1": 0.4}, "tail_mass": 0.05, "alpha": 3.0, "max_jump": 32}}],
}
UNIT_CYLINDER = {"radii": [1.0]}
ALTERNATING = {"driver": "periodic", "random_phase": True, "radii": [1.0, 0.6]}
IID_TUBE = {"driver": "iid", "radii": [1.0, 0.6, 0.8]}

SUITES: dict[str, dict[str, Any]] = {
    "rwre-homogeneous-speed": {
        "EXPERIMENT": "rwre_speed",
        "SEED": 1,
        "ENVIRONMENT": HOMOGENEOUS,
        "RHO": ["inf"],
        "STEPS": 1_000_000,
        "REPLICAS": 32,
    },
    "rwre-periodic-speed-oracle": {
        "EXPERIMENT": "rwre_speed",
        "SEED": 2,
        "ENVIRONMENT": PERIOD_3,
        "RHO": [4],
        "STEPS": 200_000,
        "REPLICAS": 32,
    },
    "oracle-exact-hit": {
        "EXPERIMENT": "oracle_check",
        "SEED": 3,
        "ENVIRONMENT": MIXED,
        "RHO": ["inf"],
        "START": -1,
        "WINDOW": 40,
        "SAMPLES": 20_000,
    },
    "rwre-cycle-speed": {
        "EXPERIMENT": "rwre_regen",
        "SEED": 4,
        "ENVIRONMENT": MIXED,
        "RHO": [8],
        "LEVELS": 8,
        "SAMPLES": 2_000,
        "CYCLES": 200,
        "REPLICAS": 16,
        "STEPS": 200_000,
    },
    "rwre-cycle-durations": {
        "EXPERIMENT": "rwre_regen",
        "SEED": 5,
        "ENVIRONMENT": MIXED,
        "RHO": [4, 8, 16],
        "LEVELS": 8,
        "SAMPLES": 2_000,
        "CYCLES": 40,
        "REPLICAS": 32,
        "STEPS": 100_000,
    },
    "rwre-periodic-occupation": {
        "EXPERIMENT": "rwre_Q",
        "SEED": 6,
        "ENVIRONMENT": PERIOD_3,
        "RHO": [4],
        "LEVELS": 9,
        "SAMPLES": 2_000,
        "CYCLES": 400,
        "REPLICAS": 16,
        "STEPS": 200_000,
    },
    "rwre-markov-rn-density": {
        "EXPERIMENT": "rwre_Q",
        "SEED": 7,
        "ENVIRONMENT": MARKOV_2,
        "RHO": [8, 16],
        "LEVELS": 8,
        "SAMPLES": 2_000,
        "CYCLES": 400,
        "REPLICAS": 16,
        "STEPS": 200_000,
    },
    "rwre-truncation-convergence": {
        "EXPERIMENT": "rwre_speed",
        "SEED": 8,
        "ENVIRONMENT": POWER_TAIL,
        "RHO": [4, 8, 16, "inf"],
        "STEPS": 200_000,
        "REPLICAS": 32,
    },
    "rwre-condition-d-guard": {
        "EXPERIMENT": "rwre_speed",
        "SEED": 9,
        "ENVIRONMENT": POWER_TAIL,
        "RHO": [8],
        "DEPTH": 8,
        "STEPS": 100_000,
        "REPLICAS": 32,
    },
    "billiard-cosine-and-tails": {
        "EXPERIMENT": "billiard_tails",
        "SEED": 10,
        "TUBE": UNIT_CYLINDER,
        "LAMBDA": [1.0],
        "EXIT_WINDOW": [0.0, 4.0],
        "SAMPLES": 100_000,
        "REPLICAS": 10_000,
        "STEPS": 2_000,
        "H_LIST": [0.0, 1.0, 2.0, 4.0, 8.0, 16.0],
    },
    "billiard-zero-speed": {
        "EXPERIMENT": "billiard_lln",
        "SEED": 11,
        "TUBE": UNIT_CYLINDER,
        "LAMBDA": [0.0],
        "STEPS": 1_000_000,
        "REPLICAS": 16,
    },
    "billiard-drift-speed": {
        "EXPERIMENT": "billiard_lln",
        "SEED": 12,
        "TUBE": UNIT_CYLINDER,
        "LAMBDA": [1.0],
        "STEPS": 1_000_000,
        "REPLICAS": 16,
    },
    "billiard-alternating-tube-seeds": {
        "EXPERIMENT": "billiard_lln",
        "SEED": 13,
        "TUBE": ALTERNATING,
        "TUBE_SEEDS": [131, 132],
        "LAMBDA": [1.0],
        "STEPS": 20_000,
        "REPLICAS": 16,
    },
    "billiard-detailed-balance": {
        "EXPERIMENT": "billiard_balance",
        "SEED": 14,
        "TUBE": UNIT_CYLINDER,
        "LAMBDA": [0.25, 1.0],
        "BANDS": [[0, 1], [0, 3]],
        "SAMPLES": 100_000,
    },
    "billiard-balance-random-tube": {
        "EXPERIMENT": "billiard_balance",
        "SEED": 15,
        "TUBE": IID_TUBE,
        "LAMBDA": [1.0],
        "BANDS": [[0, 1]],
        "SAMPLES": 50_000,
    },
    "skeleton-tails": {
        "EXPERIMENT": "skeleton",
        "SEED": 16,
        "TUBE": UNIT_CYLINDER,
        "LAMBDA": [1.0],
        "N_SKELETON": 2,
        "R1": 0.1,
        "BLOCK_LENGTH": 2,
        "STEPS": 1_000_000,
        "REPLICAS": 8,
    },
}


def list_suites() -> list[str]:
    return list(SUITES)


def suite_values(suite_id: str) -> dict[str, Any]:
    if suite_id not in SUITES:
        raise KeyError(f"unknown suite {suite_id!r}")
    return {**SUITES[suite_id], "SUITE": suite_id}


def suite_text(suite_id: str) -> str:
    return render_experiment(suite_values(suite_id))


def suite_config(suite_id: str) -> ExperimentConfig:
    """Parse a suite through the same path as a config file."""
    raw = {k: render_value(v) for k, v in suite_values(suite_id).items()}
    cfg, diags = parse_experiment(raw, source=f"suite:{suite_id}")
    if diags:
        raise ConfigError(diags, source=f"suite:{suite_id}")
    return cfg


def write_suites(directory: str) -> list[str]:
    os.makedirs(directory, exist_ok=True)
    paths = []
    for suite_id in SUITES:
        path = os.path.join(directory, f"{suite_id}.env")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(suite_text(suite_id))
        paths.append(path)
    logger.info(f"Wrote {len(paths)} suite configs to {directory}")
    return paths
