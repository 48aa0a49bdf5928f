import json

import pytest

from walklab.models.config import load_config, with_overrides
from walklab.models.experiment import (
    ConfigError,
    load_experiment,
    parse_experiment,
    render_experiment,
    validate_config,
)

ENV = {"driver": "iid", "laws": [{"jumps": {"1": 0.6, "-1": 0.4}}]}


def _write(tmp_path, text, name="speed.env"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def _speed_text(**extra):
    values = {"EXPERIMENT": "rwre_speed", "SEED": 7, "ENVIRONMENT": ENV, "RHO": [4, "inf"], **extra}
    return render_experiment(values)


def test_valid_file_has_no_diagnostics(tmp_path):
    path = _write(tmp_path, "# homogeneous walk\n" + _speed_text())

    assert validate_config(path) == []


def test_load_experiment_types_values(tmp_path):
    # Act
    cfg = load_experiment(_write(tmp_path, _speed_text(STEPS=5000)))

    # Assert
    assert cfg.kind == "rwre_speed"
    assert cfg.seed == 7
    assert cfg.get("RHO") == [4, "inf"]
    assert cfg.get("STEPS") == 5000
    assert cfg.get("REPLICAS") == 16
    assert cfg.name() == "speed"


def test_missing_seed_is_reported(tmp_path):
    text = f"EXPERIMENT=rwre_speed\nENVIRONMENT={json.dumps(ENV)}\n"

    diags = validate_config(_write(tmp_path, text))

    assert [d.key for d in diags] == ["SEED"]


def test_bad_rho_points_at_its_line(tmp_path):
    text = _speed_text().replace('RHO=[4, "inf"]', "RHO=1")

    diags = validate_config(_write(tmp_path, text))

    assert [d.key for d in diags] == ["RHO"]
    assert diags[0].line == 4


def test_unknown_key_and_unparsable_line(tmp_path):
    text = _speed_text() + "COLOUR=blue\nnot a setting\n"

    diags = validate_config(_write(tmp_path, text))

    assert {d.key for d in diags} == {"COLOUR", "<parse>"}


def test_regeneration_needs_finite_rho():
    raw = {"EXPERIMENT": "rwre_regen", "SEED": "1", "ENVIRONMENT": json.dumps(ENV), "RHO": '["inf"]'}

    cfg, diags = parse_experiment(raw)

    assert cfg is None
    assert [d.key for d in diags] == ["RHO"]


def test_billiard_kind_needs_tube():
    cfg, diags = parse_experiment({"EXPERIMENT": "billiard_lln", "SEED": "1"})

    assert cfg is None
    assert [d.key for d in diags] == ["TUBE"]


def test_negative_lambda_rejected():
    raw = {"EXPERIMENT": "billiard_lln", "SEED": "1", "TUBE": '{"radii": [1.0]}', "LAMBDA": "[-0.5]"}

    _, diags = parse_experiment(raw)

    assert [d.key for d in diags] == ["LAMBDA"]


def test_load_experiment_raises_config_error(tmp_path):
    path = _write(tmp_path, "EXPERIMENT=nonsense\nSEED=1\n")

    with pytest.raises(ConfigError) as exc:
        load_experiment(path)

    assert exc.value.source == path
    assert exc.value.diagnostics[0].key == "EXPERIMENT"


def test_echo_and_hash_ignore_seed_and_output(tmp_path):
    a = load_experiment(_write(tmp_path, _speed_text(), "a.env"))
    b = load_experiment(_write(tmp_path, _speed_text(OUTPUT="x.json"), "b.env")).with_seed(99)

    assert a.config_hash() == b.config_hash()
    assert b.seed == 99
    assert a.echo()["RHO"] == [4, "inf"]
    assert a.echo()["LAMBDA"] == [1.0]


def test_config_from_environment(monkeypatch):
    # Arrange
    monkeypatch.setenv("WALKLAB_OUT_DIR", "/tmp/out")
    monkeypatch.setenv("WALKLAB_THREADS", "4")
    monkeypatch.setenv("WALKLAB_DB_PATH", "off")
    monkeypatch.delenv("WALKLAB_DEBUG", raising=False)

    # Act
    config = load_config()

    # Assert
    assert config.out_dir == "/tmp/out"
    assert config.threads == 4
    assert config.db_path is None
    assert config.debug is False


def test_overrides_skip_none(monkeypatch):
    monkeypatch.delenv("WALKLAB_THREADS", raising=False)
    config = load_config()

    changed = with_overrides(config, threads=8, out_dir=None)

    assert changed.threads == 8
    assert changed.out_dir == config.out_dir
    assert with_overrides(config) is config
