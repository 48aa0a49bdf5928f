import numpy as np
import pytest

from walklab.env import as_rho, homogeneous
from walklab.regen import (
    DegenerateProfileError,
    RegenRecord,
    SplitParams,
    choose_eps1,
    estimate_r_profile,
    merge_records,
    run_regen_replicas,
    run_with_splitting,
    speed_cycle,
)
from walklab.regen.splitting import ladder_spacing

MIXED = {1: 0.5, 2: 0.5}


def test_choose_eps1_from_table():
    # Arrange
    profile = {1: (0.5, 0.05), 2: (0.4, 0.02)}

    # Act
    split = choose_eps1(profile, rho=4)

    # Assert: 0.5 * min(0.4, 0.36)
    assert split.eps1 == pytest.approx(0.18)
    assert split.spacing == 4
    assert split.rho == as_rho(4)


def test_choose_eps1_floor_and_cap():
    split = choose_eps1({1: (0.01, 0.01)}, rho=4)

    assert split.eps1 == pytest.approx(1e-4)


def test_choose_eps1_rejects_zero_profile():
    with pytest.raises(DegenerateProfileError):
        choose_eps1({1: (0.0, 0.0), 2: (0.5, 0.01)}, rho=4)


def test_split_params_validation():
    with pytest.raises(ValueError, match="exceeds"):
        SplitParams(eps1=0.3, rho=as_rho(4), r_estimates={1: (0.5, 0.0)}, spacing=4)
    with pytest.raises(ValueError):
        SplitParams(eps1=0.0, rho=as_rho(4), r_estimates={1: (0.5, 0.0)}, spacing=4)


def test_r_for_level_pools_beyond_the_scanned_ladder():
    split = SplitParams(eps1=0.1, rho=as_rho(4), r_estimates={1: (0.4, 0.0), 2: (0.6, 0.0)}, spacing=4)

    assert split.r_for_level(2) == 0.6
    assert split.r_for_level(7) == pytest.approx(0.5)


def test_r_profile_converges_to_two_thirds():
    # Arrange: r(x) = r(x+1)/2 + r(x+2)/2, which settles at 2/3
    expected = {1: 0.625, 2: 0.671875, 3: 0.666015625}
    env = homogeneous(MIXED)

    # Act
    profile = estimate_r_profile(env, "inf", 3, n_replicas=600, seed=4)

    # Assert
    assert profile.spacing == 3
    for j in (1, 2, 3):
        r, se = profile.estimates[j]
        assert r == pytest.approx(expected[j], abs=0.08)
        assert se > 0.0


def test_r_profile_degenerate_for_overshooting_walk():
    env = homogeneous({2: 1.0})

    with pytest.raises(DegenerateProfileError):
        estimate_r_profile(env, "inf", 2, n_replicas=20, seed=1)


def _split(env):
    return choose_eps1({1: (2 / 3, 0.0), 2: (2 / 3, 0.0)}, rho="inf", spacing=3)


def test_splitting_run_is_anchored_and_reproducible():
    # Arrange
    env = homogeneous(MIXED)
    split = _split(env)

    # Act
    a = run_with_splitting(env, split, n_cycles=50, seed=12)
    b = run_with_splitting(env, split, n_cycles=50, seed=12)

    # Assert
    assert a.n_cycles == 50
    assert a.ell == b.ell
    assert a.epoch_times == b.epoch_times
    assert a.ell == sorted(a.ell)
    assert all(c.displacement % split.spacing == 0 for c in a.cycles)
    assert sum(c.duration for c in a.cycles) == a.epoch_times[-1]
    for c in a.cycles:
        assert sum(c.occupation.values()) == c.duration


def test_cycle_speed_of_rightward_walk():
    # Arrange: every jump is +1 or +2, so v = 1.5
    env = homogeneous(MIXED)
    split = _split(env)
    records = run_regen_replicas(env, split, n_cycles=60, n_replicas=4, seed=3)

    # Act
    speed = speed_cycle(records, split)

    # Assert
    assert speed.n_cycles == 240
    assert speed.ratio.value == pytest.approx(1.5, abs=0.15)
    assert speed.mean_ell_gap.value == pytest.approx(1 / split.eps1, rel=0.35)


def test_merge_records_checks_parameters():
    a = RegenRecord(rho=as_rho(4), spacing=4, eps1=0.1, seed=1, half_width=0, n_states=1)
    b = RegenRecord(rho=as_rho(8), spacing=8, eps1=0.1, seed=2, half_width=0, n_states=1)

    with pytest.raises(ValueError, match="different"):
        merge_records([a, b])

    merged = merge_records([a, a])
    assert merged.n_runs == 2
    assert merged.n_cycles == 0


def test_durations_and_gaps_arrays():
    env = homogeneous(MIXED)
    rec = run_with_splitting(env, _split(env), n_cycles=5, seed=2)

    np.testing.assert_array_equal(rec.ell_gaps(), rec.displacements() / 3)
    assert len(list(rec.cycle_rows())) == 5


def test_ladder_spacing_is_rho_for_finite_levels():
    env = homogeneous(MIXED)

    spacings = {rho: ladder_spacing(env, rho) for rho in (4, 8, 16)}

    assert spacings == {4: 4, 8: 8, 16: 16}
    assert ladder_spacing(env, "inf") == 3


def test_r_profile_uses_rho_as_spacing():
    env = homogeneous(MIXED)

    profile = estimate_r_profile(env, 8, 2, n_replicas=400, seed=6)

    assert profile.spacing == 8
    r, _ = profile.estimates[1]
    assert r == pytest.approx(2 / 3, abs=0.1)


def test_epochs_land_on_multiples_of_rho():
    # Arrange
    env = homogeneous(MIXED)
    split = choose_eps1({1: (2 / 3, 0.0), 2: (2 / 3, 0.0)}, rho=8)

    # Act
    rec = run_with_splitting(env, split, n_cycles=20, seed=9)

    # Assert
    assert split.spacing == 8
    assert all(c.displacement % 8 == 0 for c in rec.cycles)
    positions = np.cumsum(rec.displacements()).astype(int).tolist()
    assert positions == [ell * 8 for ell in rec.ell]
