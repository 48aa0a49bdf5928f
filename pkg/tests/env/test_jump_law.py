import math

import pytest

from walklab.env import INFINITY, JumpLaw, JumpLawError, TruncationLevel, as_rho, law_from_spec, power_tail_law, truncate


def test_truncate_folds_long_jumps_onto_zero():
    # Arrange
    law = JumpLaw.from_mapping({-3: 0.1, -1: 0.2, 1: 0.5, 4: 0.2})

    # Act
    cut = truncate(law, 3)

    # Assert
    assert cut.as_dict() == pytest.approx({-1: 0.2, 0: 0.3, 1: 0.5})
    assert cut.max_offset == 1


def test_truncate_keeps_existing_holding_mass():
    law = JumpLaw.from_mapping({0: 0.1, 1: 0.6, 5: 0.3})

    cut = truncate(law, 2)

    assert cut.prob(0) == pytest.approx(0.4)
    assert cut.prob(5) == 0.0


def test_truncate_at_infinity_is_identity():
    law = JumpLaw.from_mapping({1: 0.5, 2: 0.5})

    assert truncate(law, "inf") is law
    assert truncate(law, INFINITY) is law


def test_truncation_order_does_not_change_holding_mass():
    law = power_tail_law({1: 0.6, -1: 0.4}, tail_mass=0.05, alpha=3.0, max_jump=32)

    direct = truncate(law, 4)
    staged = truncate(truncate(law, 16), 4)

    assert staged.prob(0) == direct.prob(0)
    assert staged.as_dict() == direct.as_dict()


def test_truncation_level_validation():
    with pytest.raises(JumpLawError):
        TruncationLevel(1)
    with pytest.raises(JumpLawError):
        as_rho(2.5)
    assert as_rho("inf").is_infinite
    assert as_rho(4).rho == 4
    assert as_rho(4).label() == "4"


def test_effective_level_is_bounded_by_reach():
    assert as_rho("inf").effective(5) == 6
    assert as_rho(4).effective(10) == 4
    assert as_rho(8).effective(2) == 3


def test_law_rejects_unnormalized_mass():
    with pytest.raises(JumpLawError, match="sum"):
        JumpLaw.from_mapping({1: 0.5, -1: 0.4})


def test_law_rejects_jump_beyond_cutoff():
    with pytest.raises(JumpLawError, match="cutoff"):
        JumpLaw.from_mapping({1: 0.5, 100: 0.5}, max_jump=64)


def test_mean_and_tail_mass():
    law = JumpLaw.from_mapping({-1: 0.3, 1: 0.5, 2: 0.2})

    assert law.mean() == pytest.approx(0.6)
    assert law.tail_mass(2) == pytest.approx(0.2)
    assert law.tail_mass(1) == pytest.approx(1.0)


def test_power_tail_law_declares_a_valid_coefficient():
    # Act
    law = power_tail_law({1: 0.6, -1: 0.4}, tail_mass=0.05, alpha=3.0, max_jump=32)

    # Assert
    assert math.fsum(law.probs) == pytest.approx(1.0, abs=1e-12)
    assert law.tail_exponent == 3.0
    for s in range(1, 33):
        assert law.tail_mass(s) <= law.tail_coeff * s**-3.0 * (1 + 1e-12)


def test_law_from_spec_accepts_bare_mapping():
    law = law_from_spec({"1": 0.7, "-1": 0.3})

    assert law.as_dict() == {-1: 0.3, 1: 0.7}


def test_law_from_spec_rejects_garbage():
    with pytest.raises(JumpLawError):
        law_from_spec({"shape": "gaussian"})
