# src/walklab/db/runs_db.py
from __future__ import annotations

import os
import sqlite3
from typing import Optional


def _ensure_parent_dir(db_path: str) -> None:
    parent = os.path.dirname(db_path)
    if parent:
        os.makedirs(parent, exist_ok=True)


def _apply_pragmas(conn: sqlite3.Connection) -> None:
    conn.execute("PRAGMA journal_mode = WAL;")
    conn.execute("PRAGMA synchronous = NORMAL;")


def connect(db_path: str) -> sqlite3.Connection:
    _ensure_parent_dir(db_path)
    conn = sqlite3.connect(db_path)
    init_runs_db(db_path, conn)
    return conn


def init_runs_db(db_path: str, conn: Optional[sqlite3.Connection] = None) -> None:
    _ensure_parent_dir(db_path)

    should_close = conn is None
    if conn is None:
        conn = sqlite3.connect(db_path)

    try:
        _apply_pragmas(conn)

        conn.execute(
            """
            CREATE TABLE IF NOT EXISTS runs (
              run_id TEXT PRIMARY KEY,

              experiment TEXT NOT NULL,
              config_hash TEXT NOT NULL,
              seed TEXT NOT NULL,          -- u64 does not fit sqlite INTEGER
              version TEXT NOT NULL,

              status TEXT NOT NULL,
              report_path TEXT,

              started_at TEXT NOT NULL,
              finished_at TEXT
            );
            """
        )

        conn.execute(
            """
            CREATE INDEX IF NOT EXISTS idx_runs_experiment_started
              ON runs(experiment, started_at);
            """
        )

        conn.commit()
    finally:
        if should_close:
            conn.close()
