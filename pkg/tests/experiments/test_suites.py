import pytest

from walklab.experiments.suites import list_suites, suite_config, write_suites
from walklab.models.experiment import KINDS, validate_config


def test_every_suite_parses():
    ids = list_suites()

    assert len(ids) >= 16
    for suite_id in ids:
        cfg = suite_config(suite_id)
        assert cfg.kind in KINDS
        assert cfg.name() == suite_id


def test_every_kind_has_a_suite():
    kinds = {suite_config(s).kind for s in list_suites()}

    assert kinds == set(KINDS)


def test_written_suites_validate(tmp_path):
    paths = write_suites(str(tmp_path))

    assert len(paths) == len(list_suites())
    for path in paths:
        assert validate_config(path) == []


def test_unknown_suite():
    with pytest.raises(KeyError):
        suite_config("no-such-suite")
