import numpy as np
import pytest

from walklab.utils.seeding import (
    MASK64,
    TAG_REPLICA,
    TAG_WALK,
    check_seed,
    derive_seed,
    make_rng,
    replica_seeds,
    site_uniforms,
)


def test_derive_seed_is_deterministic():
    assert derive_seed(42, TAG_WALK) == derive_seed(42, TAG_WALK)
    assert 0 <= derive_seed(42, TAG_WALK) <= MASK64


def test_different_paths_give_different_streams():
    seeds = {derive_seed(42, TAG_REPLICA, i) for i in range(100)}
    seeds.add(derive_seed(42, TAG_WALK))
    seeds.add(derive_seed(43, TAG_WALK))

    assert len(seeds) == 102


def test_derived_seed_does_not_depend_on_order():
    later = derive_seed(7, TAG_REPLICA, 5)
    replica_seeds(7, 5)

    assert replica_seeds(7, 6)[5] == later


def test_check_seed_bounds():
    assert check_seed(MASK64) == MASK64
    with pytest.raises(ValueError):
        check_seed(-1)
    with pytest.raises(ValueError):
        check_seed(MASK64 + 1)


def test_make_rng_reproducible():
    np.testing.assert_array_equal(make_rng(5).random(10), make_rng(5).random(10))


def test_site_uniforms_are_per_site():
    # Arrange
    block = site_uniforms(11, np.arange(-50, 50))

    # Act
    single = site_uniforms(11, [17])

    # Assert
    assert single[0] == block[17 + 50]
    assert np.all((block >= 0.0) & (block < 1.0))
    assert not np.array_equal(block, site_uniforms(11, np.arange(-50, 50), tag=TAG_WALK))


def test_site_uniforms_look_uniform():
    u = site_uniforms(3, np.arange(100_000))

    assert u.mean() == pytest.approx(0.5, abs=0.01)
