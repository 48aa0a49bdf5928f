# src/walklab/db/runs_repo.py
from __future__ import annotations

import sqlite3
from dataclasses import dataclass
from typing import List, Optional

from walklab.utils.time import now_iso


@dataclass(frozen=True)
class RunRow:
    run_id: str
    experiment: str
    config_hash: str
    seed: int
    version: str
    status: str
    report_path: Optional[str]
    started_at: str
    finished_at: Optional[str]


def make_run_id(config_hash: str, seed: int) -> str:
    # same config and seed always map to the same ledger row
    return f"{config_hash}:{seed}"


def start_run(conn: sqlite3.Connection, experiment: str, config_hash: str, seed: int, version: str) -> str:
    """Record a run as started; re-running an existing (config, seed) resets its row."""
    run_id = make_run_id(config_hash, seed)
    conn.execute(
        """
        INSERT INTO runs (
        run_id, experiment, config_hash, seed, version,
        status, report_path, started_at, finished_at
        )
        VALUES (?, ?, ?, ?, ?, 'running', NULL, ?, NULL)
        ON CONFLICT(run_id) DO UPDATE SET
        experiment = excluded.experiment,
        version = excluded.version,
        status = excluded.status,
        report_path = NULL,
        started_at = excluded.started_at,
        finished_at = NULL;
        """,
        (run_id, experiment, config_hash, str(seed), version, now_iso()),
    )
    conn.commit()
    return run_id


def finish_run(conn: sqlite3.Connection, run_id: str, status: str, report_path: Optional[str]) -> None:
    conn.execute(
        """
        UPDATE runs
        SET status = ?, report_path = ?, finished_at = ?
        WHERE run_id = ?;
        """,
        (status, report_path, now_iso(), run_id),
    )
    conn.commit()


def list_runs(conn: sqlite3.Connection, limit: int = 50, experiment: Optional[str] = None) -> List[RunRow]:
    """Most recent runs first."""
    sql = """
        SELECT run_id, experiment, config_hash, seed, version,
               status, report_path, started_at, finished_at
        FROM runs
    """
    params: tuple = ()
    if experiment:
        sql += " WHERE experiment = ?"
        params = (experiment,)
    sql += " ORDER BY started_at DESC LIMIT ?;"
    rows = conn.execute(sql, params + (int(limit),)).fetchall()
    return [
        RunRow(
            run_id=r[0], experiment=r[1], config_hash=r[2], seed=int(r[3]), version=r[4],
            status=r[5], report_path=r[6], started_at=r[7], finished_at=r[8],
        )
        for r in rows
    ]
