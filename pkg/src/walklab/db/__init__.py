from .runs_db import connect, init_runs_db
from .runs_repo import RunRow, finish_run, list_runs, make_run_id, start_run

__all__ = ["connect", "init_runs_db", "RunRow", "finish_run", "list_runs", "make_run_id", "start_run"]
