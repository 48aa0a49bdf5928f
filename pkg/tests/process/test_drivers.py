import numpy as np
import pytest
from scipy import stats

from walklab.process import (
    ConstantDriver,
    DriverSpecError,
    IidDriver,
    MarkovDriver,
    PeriodicDriver,
    StateSequence,
    build_driver,
    is_irreducible,
    stationary_distribution,
    time_reversal,
)


def test_iid_window_probability_is_product_of_weights():
    # Arrange
    driver = IidDriver(weights=(0.25, 0.75))

    # Act
    p = driver.window_probability((0, 1, 1))

    # Assert
    assert p == pytest.approx(0.25 * 0.75 * 0.75)


def test_periodic_window_probability_only_for_consecutive_phases():
    driver = PeriodicDriver(period=3)

    assert driver.window_probability((0, 1, 2)) == pytest.approx(1 / 3)
    assert driver.window_probability((2, 0, 1)) == pytest.approx(1 / 3)
    assert driver.window_probability((0, 2, 1)) == 0.0


def test_periodic_support_has_one_window_per_phase():
    driver = PeriodicDriver(period=3)

    support = driver.window_support(1)

    assert sorted(support) == [(0, 1, 2), (1, 2, 0), (2, 0, 1)]


def test_constant_driver_is_all_zero():
    driver = ConstantDriver()

    states = driver.direct_states(7, np.arange(-5, 5))

    assert states.tolist() == [0] * 10
    assert driver.stationary().tolist() == [1.0]


def test_stationary_distribution_two_state():
    # Arrange
    P = [[0.8, 0.2], [0.3, 0.7]]

    # Act
    pi = stationary_distribution(P)

    # Assert: pi_0 = 0.3 / (0.2 + 0.3)
    assert pi == pytest.approx([0.6, 0.4])


def test_time_reversal_of_reversible_chain_is_itself():
    P = np.array([[0.8, 0.2], [0.3, 0.7]])

    rev = time_reversal(P, stationary_distribution(P))

    np.testing.assert_allclose(rev, P, atol=1e-12)


def test_reducible_chain_detected():
    assert is_irreducible([[0.5, 0.5], [0.5, 0.5]])
    assert not is_irreducible([[1.0, 0.0], [0.0, 1.0]])

    with pytest.raises(DriverSpecError, match="reducible"):
        MarkovDriver(transition=((1.0, 0.0), (0.0, 1.0)))


def test_build_driver_rejects_bad_specs():
    with pytest.raises(DriverSpecError, match="unknown driver"):
        build_driver({"driver": "fractal"}, 2)
    with pytest.raises(DriverSpecError, match="exactly one state"):
        build_driver({"driver": "constant"}, 2)
    with pytest.raises(DriverSpecError, match="weights"):
        build_driver({"driver": "iid", "weights": [0.5]}, 2)
    with pytest.raises(DriverSpecError, match="transition"):
        build_driver({"driver": "markov"}, 2)


def test_build_driver_iid_defaults_to_uniform_weights():
    driver = build_driver({"driver": "iid"}, 4)

    assert driver.weights == (0.25, 0.25, 0.25, 0.25)


def test_state_sequence_is_reproducible_and_window_independent():
    # Arrange
    driver = IidDriver(weights=(0.5, 0.5))
    a = StateSequence(driver, seed=42)
    b = StateSequence(driver, seed=42)

    # Act: grow the caches in different orders
    far = a.window(9000, 9010).tolist()
    near = a.window(-10, 10).tolist()
    near_b = b.window(-10, 10).tolist()
    far_b = b.window(9000, 9010).tolist()

    # Assert
    assert near == near_b
    assert far == far_b
    assert [a.state_at(x) for x in range(-10, 10)] == near


def test_markov_sequence_respects_forbidden_transitions():
    # Arrange: state 1 always returns to 0
    driver = MarkovDriver(transition=((0.5, 0.5), (1.0, 0.0)))
    seq = StateSequence(driver, seed=3)

    # Act
    states = seq.window(-5000, 5000)

    # Assert
    pairs = set(zip(states[:-1].tolist(), states[1:].tolist()))
    assert (1, 1) not in pairs
    assert {(0, 0), (0, 1), (1, 0)} <= pairs


def test_markov_sequence_marginal_close_to_stationary():
    driver = MarkovDriver(transition=((0.8, 0.2), (0.3, 0.7)))
    seq = StateSequence(driver, seed=11)

    states = seq.window(-20000, 20000)

    assert np.mean(states == 0) == pytest.approx(0.6, abs=0.03)


def test_random_phase_shifts_the_whole_sequence():
    driver = PeriodicDriver(period=3, random_phase=True)
    seq = StateSequence(driver, seed=5)

    states = seq.window(0, 9).tolist()

    phase = driver.phase(5)
    assert states == [(x + phase) % 3 for x in range(9)]


def test_markov_sequence_is_shift_stationary_across_seeds():
    # Arrange: the law of the state must not depend on the site, on either side of 0
    driver = MarkovDriver(transition=((0.8, 0.2), (0.3, 0.7)))
    sites = (-17, 0, 17)

    # Act
    table = np.zeros((len(sites), 2), dtype=int)
    for seed in range(1500):
        seq = StateSequence(driver, seed=seed)
        for row, site in enumerate(sites):
            table[row, seq.state_at(site)] += 1

    # Assert
    assert stats.chi2_contingency(table).pvalue > 0.001
    np.testing.assert_allclose(table[:, 0] / 1500, [0.6, 0.6, 0.6], atol=0.045)
