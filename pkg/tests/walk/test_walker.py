import numpy as np
import pytest

from walklab.env import build_environment, homogeneous
from walklab.utils.seeding import TAG_WALK, derive_seed
from walklab.walk import (
    dump_run_csv,
    final_positions,
    hit,
    one_step_chi_square,
    run_coupled,
    run_walk,
    visit_counts,
)

PERIOD_3 = {
    "driver": "periodic",
    "laws": [
        {"jumps": {"-1": 0.3, "1": 0.5, "2": 0.2}},
        {"jumps": {"-1": 0.5, "1": 0.3, "2": 0.2}},
        {"jumps": {"-1": 0.3, "1": 0.6, "2": 0.1}},
    ],
}


def test_run_walk_is_deterministic_in_its_seed():
    env = build_environment(PERIOD_3, seed=1)

    a = run_walk(env, "inf", 0, 5000, seed=77)
    b = run_walk(env, "inf", 0, 5000, seed=77)
    c = run_walk(env, "inf", 0, 5000, seed=78)

    np.testing.assert_array_equal(a.positions, b.positions)
    assert not np.array_equal(a.positions, c.positions)
    assert a.n_steps == 5000
    assert a.positions[0] == 0


def test_homogeneous_walk_speed():
    # Arrange: v = 0.6 - 0.4
    env = homogeneous({1: 0.6, -1: 0.4})

    # Act
    run = run_walk(env, "inf", 0, 200_000, seed=5)

    # Assert
    assert run.final / run.n_steps == pytest.approx(0.2, abs=0.02)
    assert run.rejected_steps == 0


def test_truncated_walk_never_takes_a_cut_jump():
    # Arrange
    env = homogeneous({1: 0.5, 2: 0.5})

    # Act
    run = run_walk(env, 2, 0, 10_000, seed=3)

    # Assert
    steps = np.diff(run.positions)
    assert set(np.unique(steps).tolist()) <= {0, 1}
    assert run.rejected_steps == int(np.sum(steps == 0))
    assert run.rejected_steps == pytest.approx(5000, abs=300)


def test_coupled_first_walk_matches_single_walk():
    # Arrange
    env = build_environment(PERIOD_3, seed=1)

    # Act
    run1, run2 = run_coupled(env, 2, "inf", 0, 3000, seed=21)
    single = run_walk(env, 2, 0, 3000, derive_seed(21, TAG_WALK))

    # Assert
    np.testing.assert_array_equal(run1.positions, single.positions)
    if run1.separated_at is not None:
        k = run1.separated_at
        np.testing.assert_array_equal(run1.positions[:k], run2.positions[:k])
        assert run1.positions[k] != run2.positions[k]


def test_coupled_walks_agree_until_the_first_long_jump():
    # Arrange: only the +3 jump is cut at rho1 = 3
    env = homogeneous({1: 0.5, 3: 0.2, -1: 0.3})

    # Act
    run1, run2 = run_coupled(env, 3, "inf", 0, 200, seed=4)

    # Assert
    k = run2.separated_at
    assert k is not None
    np.testing.assert_array_equal(run1.positions[:k], run2.positions[:k])
    assert 3 not in np.diff(run2.positions[:k]).tolist()
    assert run1.positions[k] == run1.positions[k - 1]
    assert run2.positions[k] - run2.positions[k - 1] == 3
    assert run1.rejected_steps >= 1


def test_coupling_rejects_decreasing_levels():
    env = homogeneous({1: 0.6, -1: 0.4})

    with pytest.raises(ValueError, match="rho1 <= rho2"):
        run_coupled(env, "inf", 4, 0, 10, seed=1)


def test_hit_from_target_or_beyond_is_immediate():
    env = homogeneous({1: 0.6, -1: 0.4})

    rec = hit(env, "inf", 3, 0, seed=1)

    assert rec.T == 0
    assert rec.landed_at == 3
    assert not rec.exact


def test_hit_deterministic_walks():
    right_one = homogeneous({1: 1.0})
    right_two = homogeneous({2: 1.0})

    exact = hit(right_one, "inf", -5, 0, seed=1)
    over = hit(right_two, "inf", -1, 0, seed=1)

    assert (exact.T, exact.landed_at, exact.exact) == (5, 0, True)
    assert (over.T, over.landed_at, over.exact) == (1, 1, False)


def test_hit_reports_exhausted_step_cap():
    env = homogeneous({-1: 1.0})

    rec = hit(env, "inf", -1, 0, seed=1, step_cap=100)

    assert rec.T is None
    assert not rec.reached


def test_final_positions_match_individual_runs():
    env = build_environment(PERIOD_3, seed=1)
    seeds = [11, 12, 13]

    finals, rejected = final_positions(env, 4, 0, 2500, seeds)

    for s, f, r in zip(seeds, finals.tolist(), rejected.tolist()):
        run = run_walk(env, 4, 0, 2500, s)
        assert f == run.final
        assert r == run.rejected_steps


def test_visit_counts_over_window():
    env = homogeneous({1: 1.0})
    run = run_walk(env, "inf", -3, 6, seed=1)

    counts = visit_counts(run, (-2, 1))

    assert counts.counts == {-2: 1, -1: 1, 0: 1, 1: 1}
    assert counts.total == 4


def test_one_step_law_matches_truncated_site_law():
    env = build_environment(PERIOD_3, seed=1)

    result = one_step_chi_square(env, 2, site=1, n_steps=50_000, seed=9, level=1e-6)

    assert result["passed"]
    assert "stray_offsets" not in result


def test_dump_run_csv_writes_one_row_per_position(tmp_path):
    env = homogeneous({1: 1.0})
    run = run_walk(env, "inf", 0, 4, seed=1)
    path = tmp_path / "walk.csv"

    n = dump_run_csv(run, str(path))

    assert n == 5
    lines = path.read_text().splitlines()
    assert lines[0] == "step,position"
    assert lines[-1] == "4,4"
