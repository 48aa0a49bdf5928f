import math
from unittest.mock import MagicMock, patch

import numpy as np
import pytest

from walklab.billiard import (
    BandError,
    BilliardParams,
    backtrack_stat,
    chord_axial_lengths,
    chord_tail,
    detailed_balance_test,
    exit_time_tail,
    hitting_bound_test,
    pi_mass,
    sample_weighted_start,
)
from walklab.tube import build_tube, pi_measure
from walklab.utils.seeding import make_rng

UNIT = {"radii": [1.0]}
ALTERNATING = {"driver": "periodic", "radii": [1.0, 2.0]}


@pytest.fixture
def unit():
    return build_tube(UNIT, seed=0)


def test_weighted_start_favours_bands_ahead(unit):
    # Arrange: band masses differ by e^lam, and alpha - j has density e^u / (e - 1)
    rng = make_rng(3)

    # Act
    points = [sample_weighted_start(unit, [0, 1], 1.0, rng) for _ in range(4000)]

    # Assert
    bands = np.array([p.band for p in points])
    assert set(bands.tolist()) <= {0, 1}
    assert np.mean(bands == 1) == pytest.approx(math.e / (1.0 + math.e), abs=0.03)
    offsets = np.array([p.alpha - p.band for p in points])
    assert offsets.mean() == pytest.approx(1.0 / (math.e - 1.0), abs=0.03)


def test_weighted_start_rejects_empty_and_massless_bands(unit):
    with pytest.raises(BandError, match="empty"):
        sample_weighted_start(unit, [], 1.0, make_rng(0))
    with patch("walklab.billiard.diagnostics.pi_measure", return_value=0.0):
        with pytest.raises(BandError, match="zero measure"):
            sample_weighted_start(unit, 0, 1.0, make_rng(0))


def test_pi_mass_sums_band_masses(unit):
    assert pi_mass(unit, [0, 1], 0.5) == pytest.approx(pi_measure(unit, 0, 0.5) + pi_measure(unit, 1, 0.5))


def test_detailed_balance_between_distinct_bands_with_drift(unit):
    # Act
    out = detailed_balance_test(unit, BilliardParams(lam=0.5), 0, 1, n_samples=20_000, seed=4, threads=2)

    # Assert
    assert out["B1"] == [0] and out["B2"] == [1]
    assert out["pi_B2"] == pytest.approx(out["pi_B1"] * math.exp(0.5))
    assert out["flux_12"] > 0.0
    assert out["flux_21"] > 0.0
    assert out["passed"]
    assert abs(out["z"]) <= 3.0


def test_detailed_balance_rejects_overlapping_band_sets(unit):
    with pytest.raises(BandError, match="overlap"):
        detailed_balance_test(unit, BilliardParams(lam=0.5), [0, 1], [1, 2], n_samples=10, seed=0)


def test_hitting_bound_behind_a_drift(unit):
    # Arrange: with lam = 1 the bound for a band three cells back is 3 e^-3
    params = BilliardParams(lam=1.0)

    # Act
    out = hitting_bound_test(unit, params, 0, -3, m=3, n_samples=2000, seed=5)

    # Assert
    assert out["bound"] == pytest.approx(3.0 * math.exp(-3.0))
    assert out["probability"]["value"] < out["bound"]
    assert out["passed"]


def test_exit_time_survival_is_monotone(unit):
    # Act
    out = exit_time_tail(unit, BilliardParams(lam=0.0), 0.0, 2.0, None, n_replicas=60, seed=2, t_max=3, threads=1)

    # Assert
    assert out["t"] == [1, 2, 3]
    assert len(out["survival"]) == 3
    assert len(out["ratios"]) == 2
    assert out["monotone"]
    assert out["n_replicas"] == 60
    assert 0.0 < out["mean_tau"] <= 8 * 3 + 2


def test_exit_time_needs_a_unit_window(unit):
    with pytest.raises(ValueError, match="b - a"):
        exit_time_tail(unit, BilliardParams(lam=0.0), 0.0, 0.5, None, n_replicas=2, seed=0)


def test_backtrack_frequency_per_depth():
    # Arrange: lowest excursions of 0, -0.5, -3 and -10 below the start
    runs = [MagicMock(alphas=np.array([0.0, 1.0, 2.0 - d])) for d in (2.0, 2.5, 5.0, 12.0)]

    # Act
    out = backtrack_stat(runs, [0.0, 1.0, 4.0])

    # Assert
    assert out["runs"] == 4
    assert out["frequency"] == [0.75, 0.5, 0.25]
    assert "sqrt_slope" in out


def test_chord_lengths_of_cylinder_are_symmetric(unit):
    lengths = chord_axial_lengths(unit, 50_000, seed=1)

    assert lengths.shape == (50_000,)
    assert np.median(lengths) == pytest.approx(0.0, abs=0.05)


def test_chord_lengths_in_a_varying_tube():
    tube = build_tube(ALTERNATING, seed=0)

    lengths = chord_axial_lengths(tube, 200, seed=1, band=0, threads=2)

    assert lengths.shape == (200,)
    assert np.all(np.isfinite(lengths))


def test_chord_tail_decays_at_least_quadratically(unit):
    out = chord_tail(unit, 200_000, seed=7)

    assert out["exponent"] >= 1.8
    assert out["points"] >= 10
