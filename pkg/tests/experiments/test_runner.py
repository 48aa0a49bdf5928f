import json
from unittest.mock import MagicMock, patch

import pytest

from walklab.db import connect, list_runs
from walklab.experiments.runner import (
    EXIT_CONFIG,
    EXIT_DIAGNOSTIC,
    EXIT_OK,
    HANDLERS,
    default_report_path,
    run_experiment,
)
from walklab.models.config import Config
from walklab.models.experiment import parse_experiment, render_value
from walklab.oracle import OracleError
from walklab.stats import Estimate

ENV = {"driver": "iid", "laws": [{"jumps": {"1": 0.6, "-1": 0.4}}]}


def _config(tmp_path, db=True):
    return Config(
        app_name="walklab",
        out_dir=str(tmp_path / "reports"),
        db_path=str(tmp_path / "runs.db") if db else None,
        threads=1,
        step_cap=100_000,
        max_jump=64,
        debug=False,
    )


def _cfg(**extra):
    values = {"EXPERIMENT": "rwre_speed", "SEED": 5, "ENVIRONMENT": ENV, **extra}
    cfg, diags = parse_experiment({k: render_value(v) for k, v in values.items()})
    assert diags == []
    return cfg


def _passing(ctx):
    ctx.results["v"] = 0.2
    ctx.check("speed", True)


def _failing(ctx):
    ctx.check("speed", False)


def test_ok_run_writes_report_and_ledger(tmp_path):
    # Arrange
    config = _config(tmp_path)
    cfg = _cfg()

    # Act
    with patch.dict(HANDLERS, {"rwre_speed": MagicMock(side_effect=_passing)}):
        outcome = run_experiment(cfg, config)

    # Assert
    assert outcome.exit_code == EXIT_OK
    assert outcome.report_path == default_report_path(cfg, config)
    with open(outcome.report_path) as fh:
        report = json.load(fh)
    assert report["status"] == "ok"
    assert report["results"] == {"v": 0.2, "checks": {"speed": True}}
    assert report["seed"] == "5"
    rows = list_runs(connect(config.db_path))
    assert [r.status for r in rows] == ["ok"]


def test_failed_check_is_a_diagnostic_failure(tmp_path):
    with patch.dict(HANDLERS, {"rwre_speed": MagicMock(side_effect=_failing)}):
        outcome = run_experiment(_cfg(), _config(tmp_path))

    assert outcome.exit_code == EXIT_DIAGNOSTIC
    assert outcome.report["status"] == "diagnostic_failure"
    assert "speed" in outcome.report["error"]


def test_oracle_error_is_a_diagnostic_failure(tmp_path):
    boom = MagicMock(side_effect=OracleError("outside bracket"))

    with patch.dict(HANDLERS, {"rwre_speed": boom}):
        outcome = run_experiment(_cfg(), _config(tmp_path, db=False))

    assert outcome.exit_code == EXIT_DIAGNOSTIC
    assert outcome.report["error"] == "OracleError: outside bracket"


def test_unexpected_error_still_writes_a_report(tmp_path):
    boom = MagicMock(side_effect=ValueError("bad input"))
    config = _config(tmp_path)

    with patch.dict(HANDLERS, {"rwre_speed": boom}):
        outcome = run_experiment(_cfg(), config, report_path=str(tmp_path / "r.json"))

    assert outcome.exit_code == EXIT_CONFIG
    assert outcome.report["status"] == "error"
    assert (tmp_path / "r.json").exists()
    assert [r.status for r in list_runs(connect(config.db_path))] == ["error"]


def test_output_key_sets_report_path(tmp_path):
    cfg = _cfg(OUTPUT=str(tmp_path / "custom.json"))

    assert default_report_path(cfg, _config(tmp_path)) == str(tmp_path / "custom.json")


def test_homogeneous_speed_end_to_end(tmp_path):
    # Arrange
    cfg = _cfg(RHO=["inf"], STEPS=2000, REPLICAS=8, CSV=True)

    # Act
    outcome = run_experiment(cfg, _config(tmp_path, db=False))

    # Assert
    row = outcome.report["results"]["speeds"][0]
    assert row["rho"] == "inf"
    assert row["v_exact"] == pytest.approx(0.2)
    assert isinstance(outcome.report["invariants"], dict)
    assert [p.rsplit("_", 1)[-1] for p in outcome.csv_paths] == ["walk.csv", "sites.csv"]
    with open(outcome.csv_paths[1]) as fh:
        assert fh.readline().strip() == "site,state,p_plus_one,mean_jump"
    assert outcome.exit_code in (EXIT_OK, EXIT_DIAGNOSTIC)


def test_cycle_speed_outside_two_percent_fails_even_within_three_sigma(tmp_path):
    # Arrange: 5% apart, but the cycle estimate is noisy enough to sit inside 3 sigma
    cfg = _cfg(EXPERIMENT="rwre_regen", RHO=[4], REPLICAS=1, CYCLES=1)
    split = MagicMock()
    split.rho.label.return_value = "4"
    split.summary.return_value = {}
    merged = MagicMock()
    merged.summary.return_value = {}
    cycle = MagicMock(ratio=Estimate(1.05, 0.05, 100))
    cycle.summary.return_value = {}

    # Act
    with (
        patch("walklab.experiments.runner.split_for", return_value=split),
        patch("walklab.experiments.runner.run_regen_replicas", return_value=[MagicMock()]),
        patch("walklab.experiments.runner.merge_records", return_value=merged),
        patch("walklab.experiments.runner.speed_cycle", return_value=cycle),
        patch("walklab.experiments.runner.speed_direct", return_value=Estimate(1.0, 0.001, 100)),
    ):
        outcome = run_experiment(cfg, _config(tmp_path, db=False))

    # Assert
    assert outcome.exit_code == EXIT_DIAGNOSTIC
    row = outcome.report["results"]["speeds"][0]
    assert row["within_3_sigma"] is True
    assert row["relative_difference"] == pytest.approx(0.05 / 1.05)
    assert outcome.report["results"]["checks"]["speed_cycle_rho_4"] is False
