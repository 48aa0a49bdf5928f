# src/walklab/report/json_out.py
"""
JSON reports.

Reports are written with sorted keys and a fixed indent, so two runs of the same
config and seed give identical bytes everywhere except ``wall_clock``.
"""

from __future__ import annotations

import json
import logging
import math
from typing import Any, Mapping

import numpy as np

from walklab.report.csv_out import _ensure_parent_dir

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

STATUS_OK = "ok"
STATUS_DIAGNOSTIC_FAILURE = "diagnostic_failure"
STATUS_ERROR = "error"


def to_jsonable(value: Any) -> Any:
    """numpy scalars and arrays to plain Python; non-finite floats to the strings "inf", "-inf", "nan"."""
    if isinstance(value, Mapping):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return value


def build_report(
    experiment: str,
    version: str,
    config: Mapping[str, Any],
    seed: int,
    results: Mapping[str, Any],
    status: str,
    error: str | None,
    invariants: Mapping[str, int],
    wall_clock: Mapping[str, Any],
) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "experiment": experiment,
        "version": version,
        "config": to_jsonable(config),
        "seed": str(seed),
        "results": to_jsonable(results),
        "status": status,
        "error": error,
        "invariants": dict(invariants),
        "wall_clock": to_jsonable(wall_clock),
    }


def dumps_report(report: Mapping[str, Any]) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def write_report(path: str, report: Mapping[str, Any]) -> str:
    _ensure_parent_dir(path)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_report(report))
    logger.info(f"Wrote report {path}")
    return path


def read_report(path: str) -> dict[str, Any]:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def strip_wall_clock(report: Mapping[str, Any]) -> dict[str, Any]:
    """The deterministic part of a report."""
    return {k: v for k, v in report.items() if k != "wall_clock"}
