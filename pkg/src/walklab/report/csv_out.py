# src/walklab/report/csv_out.py
from __future__ import annotations

import csv
import logging
import os
from typing import Iterable, Mapping, Sequence

logger = logging.getLogger(__name__)


def _ensure_parent_dir(path: str) -> None:
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> int:
    """Write ``rows`` under ``header``; returns the number of data rows."""
    _ensure_parent_dir(path)
    n = 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
            n += 1
    logger.debug(f"Wrote {n} rows to {path}")
    return n


def write_dict_csv(path: str, rows: Sequence[Mapping]) -> int:
    if not rows:
        logger.warning(f"No rows for {path}; CSV skipped")
        return 0
    header = list(rows[0].keys())
    return write_csv(path, header, ([r[k] for k in header] for r in rows))
