import math
from unittest.mock import MagicMock

import numpy as np
import pytest

from walklab.billiard import (
    BilliardParams,
    BilliardParamsError,
    accept_probability,
    cosine_constant,
    cosine_direction,
    cosine_sampler_check,
    estimate_theta,
    step,
    theta_cylinder_quadrature,
)
from walklab.tube import LATERAL, BoundaryPoint, Patch, build_tube


def _lateral(alpha, angle=0.0, radius=1.0):
    return BoundaryPoint(alpha=alpha, patch=Patch(kind=LATERAL, index=math.floor(alpha)), angle=angle, radial=radius)


def test_params_validation():
    with pytest.raises(BilliardParamsError):
        BilliardParams(lam=-0.1)
    with pytest.raises(BilliardParamsError):
        BilliardParams(lam=1.0, r1=0.0)
    with pytest.raises(BilliardParamsError):
        BilliardParams(lam=1.0, N_skeleton=0)
    assert BilliardParams(lam=0.5).summary() == {"lambda": 0.5, "N_skeleton": 2, "r1": 0.1, "L": 3}


def test_accept_probability():
    assert accept_probability(0.0, 2.0) == 1.0
    assert accept_probability(3.0, 2.0) == 1.0
    assert accept_probability(-0.5, 2.0) == pytest.approx(math.exp(-1.0))
    assert accept_probability(-4.0, 0.0) == 1.0


def test_cosine_direction_is_a_unit_vector_inside():
    n = np.array([0.0, -1.0, 0.0])

    straight = cosine_direction(n, 0.0, 0.3)
    tilted = cosine_direction(n, 0.75, 0.3)

    np.testing.assert_allclose(straight, n, atol=1e-12)
    assert np.linalg.norm(tilted) == pytest.approx(1.0)
    assert float(np.dot(tilted, n)) == pytest.approx(0.5)


def test_cosine_constant_is_one_over_pi():
    assert cosine_constant() == pytest.approx(1.0 / math.pi, rel=1e-8)


def test_cosine_sampler_law():
    # Act
    check = cosine_sampler_check(20_000, seed=3)

    # Assert: w.n has CDF t^2 and mean 2/3
    assert check["ks_distance"] < 0.02
    assert check["mean"]["value"] == pytest.approx(2.0 / 3.0, abs=0.01)
    assert check["min_dot"] > 0.0


def test_no_holding_without_drift():
    assert theta_cylinder_quadrature(1.0, 0.0) == 0.0


def test_holding_probability_grows_with_drift():
    low = theta_cylinder_quadrature(1.0, 0.25)
    high = theta_cylinder_quadrature(1.0, 2.0)

    assert 0.0 < low < high < 0.5


def test_estimated_holding_matches_quadrature():
    # Arrange
    tube = build_tube({"radii": [1.0]}, seed=0)
    params = BilliardParams(lam=1.0)

    # Act
    est = estimate_theta(tube, params, _lateral(0.5), 4000, seed=8)

    # Assert
    exact = theta_cylinder_quadrature(1.0, 1.0)
    assert abs(est.value - exact) <= 4.0 * est.stderr + 1e-3


def test_step_holds_in_place_when_refused():
    # Arrange: straight-in chord (Delta = 0) is always taken, a backward one refused by u = 0.999
    tube = build_tube({"radii": [1.0]}, seed=0)
    params = BilliardParams(lam=50.0)
    x = _lateral(0.5)
    rng = MagicMock()
    # u_cos = 0.5, azimuth 0.5 points backward along the axis, acceptance uniform 0.999
    rng.random.return_value = np.array([0.5, 0.5, 0.999])

    # Act
    nxt, proposal = step(tube, params, x, rng)

    # Assert
    assert proposal.delta < 0.0
    assert not proposal.accepted
    assert nxt is x


def test_forward_proposal_is_always_taken():
    tube = build_tube({"radii": [1.0]}, seed=0)
    params = BilliardParams(lam=50.0)
    x = _lateral(0.5)
    rng = MagicMock()
    rng.random.return_value = np.array([0.5, 0.0, 0.999])

    nxt, proposal = step(tube, params, x, rng)

    assert proposal.delta > 0.0
    assert proposal.accepted
    assert nxt.alpha == pytest.approx(0.5 + proposal.delta)
