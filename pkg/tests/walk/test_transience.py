import numpy as np
import pytest

from walklab.env import INFINITY, homogeneous
from walklab.walk import ConditionDError, choose_rho0, condition_D_scan, estimate_condition_D


@pytest.fixture
def right_drift():
    return homogeneous({1: 0.6, -1: 0.4})


def test_visits_match_nearest_neighbour_green_function(right_drift):
    # Act
    est = estimate_condition_D(right_drift, "inf", depth=3, n_replicas=400, seed=1, threads=1)

    # Assert: g(k) = (q/p)^k / (p - q) for p = 0.6
    expected = 5.0 * (2.0 / 3.0) ** np.arange(4)
    assert np.all(np.abs(est.g_hat - expected) <= 4.0 * est.stderr + 1e-9)
    assert est.passed
    assert est.backtrack_fraction == 0.0
    assert est.summary()["rho"] == "inf"


def test_left_drift_never_clears_the_barrier():
    env = homogeneous({1: 0.4, -1: 0.6})

    with pytest.raises(ConditionDError):
        estimate_condition_D(env, "inf", depth=2, n_replicas=2, seed=3, barrier=10, step_cap=2000, threads=1)


def test_argument_checks(right_drift):
    with pytest.raises(ValueError):
        estimate_condition_D(right_drift, "inf", depth=0, n_replicas=10, seed=0)
    with pytest.raises(ValueError):
        estimate_condition_D(right_drift, "inf", depth=2, n_replicas=1, seed=0)


def test_scan_tries_four_levels(right_drift):
    rows = condition_D_scan(right_drift, 2, depth=2, n_replicas=50, seed=4, threads=1)

    assert [r["rho"] for r in rows] == ["2", "4", "8", "inf"]
    assert all(r["passed"] for r in rows)


def test_choose_rho0_falls_back_to_infinity(right_drift):
    # no finite candidate below the largest jump, so only inf is tried
    assert choose_rho0(right_drift, depth=2, n_replicas=50, seed=5, threads=1) is INFINITY
