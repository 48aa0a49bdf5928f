from walklab.db import connect, finish_run, list_runs, make_run_id, start_run


def test_start_and_finish_run(tmp_path):
    # Arrange
    conn = connect(str(tmp_path / "ledger" / "runs.db"))

    # Act
    run_id = start_run(conn, "rwre_speed", "abc123", 2**64 - 1, "v1")
    finish_run(conn, run_id, "ok", "reports/a.json")

    # Assert
    rows = list_runs(conn)
    assert len(rows) == 1
    assert rows[0].run_id == make_run_id("abc123", 2**64 - 1)
    assert rows[0].seed == 2**64 - 1
    assert rows[0].status == "ok"
    assert rows[0].report_path == "reports/a.json"
    assert rows[0].finished_at is not None
    conn.close()


def test_rerun_resets_the_row(tmp_path):
    conn = connect(str(tmp_path / "runs.db"))
    run_id = start_run(conn, "rwre_speed", "abc123", 5, "v1")
    finish_run(conn, run_id, "diagnostic_failure", "r.json")

    start_run(conn, "rwre_speed", "abc123", 5, "v2")

    rows = list_runs(conn)
    assert len(rows) == 1
    assert rows[0].status == "running"
    assert rows[0].report_path is None
    assert rows[0].version == "v2"
    conn.close()


def test_list_runs_filters_by_experiment(tmp_path):
    conn = connect(str(tmp_path / "runs.db"))
    start_run(conn, "rwre_speed", "h1", 1, "v1")
    start_run(conn, "billiard_lln", "h2", 1, "v1")

    rows = list_runs(conn, experiment="billiard_lln")

    assert [r.config_hash for r in rows] == ["h2"]
    conn.close()
