import math

import numpy as np

from walklab.report.json_out import (
    STATUS_OK,
    build_report,
    dumps_report,
    read_report,
    strip_wall_clock,
    to_jsonable,
    write_report,
)


def _report(results, wall=1.5):
    return build_report(
        experiment="rwre_speed",
        version="test",
        config={"SEED": 3, "RHO": [4, "inf"]},
        seed=2**63 + 1,
        results=results,
        status=STATUS_OK,
        error=None,
        invariants={"alias_table": 4},
        wall_clock={"seconds": wall},
    )


def test_non_finite_floats_become_strings():
    out = to_jsonable({"a": math.nan, "b": np.float64(math.inf), "c": [-math.inf, 1.5]})

    assert out == {"a": "nan", "b": "inf", "c": ["-inf", 1.5]}


def test_numpy_values_become_python():
    out = to_jsonable({1: np.arange(3), "flag": np.bool_(True), "n": np.int64(7)})

    assert out == {"1": [0, 1, 2], "flag": True, "n": 7}
    assert type(out["n"]) is int


def test_seed_is_written_as_string():
    assert _report({})["seed"] == str(2**63 + 1)


def test_same_results_give_same_bytes_apart_from_wall_clock():
    a = _report({"v": 0.2, "z": [1, 2]}, wall=1.0)
    b = _report({"z": [1, 2], "v": 0.2}, wall=9.0)

    assert dumps_report(a) != dumps_report(b)
    assert dumps_report(strip_wall_clock(a)) == dumps_report(strip_wall_clock(b))


def test_write_and_read(tmp_path):
    path = tmp_path / "nested" / "r.json"

    write_report(str(path), _report({"v": math.nan}))

    assert read_report(str(path))["results"] == {"v": "nan"}
