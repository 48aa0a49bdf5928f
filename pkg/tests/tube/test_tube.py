import math

import numpy as np
import pytest

from walklab.tube import (
    LATERAL,
    STEP,
    BoundaryPoint,
    NonRegularPointError,
    Patch,
    TubeSpecError,
    band_measure,
    band_patches,
    boundary_residual,
    build_tube,
    embed,
    inner_normal,
    pi_measure,
    sample_boundary_uniform,
)

ALTERNATING = {"driver": "periodic", "radii": [1.0, 2.0]}


def test_unit_cylinder_band_measure():
    tube = build_tube({"radii": [1.0]}, seed=0)

    assert tube.constant
    assert band_measure(tube, 0) == pytest.approx(2 * math.pi)
    assert band_measure(tube, -7) == pytest.approx(2 * math.pi)


def test_weighted_band_measure_on_cylinder():
    tube = build_tube({"radii": [1.0]}, seed=0)

    assert pi_measure(tube, 0, 0.0) == pytest.approx(2 * math.pi)
    assert pi_measure(tube, 0, 1.0) == pytest.approx(2 * math.pi * (math.e - 1.0))
    assert pi_measure(tube, 2, 1.0) == pytest.approx(2 * math.pi * math.e**2 * (math.e - 1.0))


def test_alternating_tube_steps_and_bands():
    # Arrange: cell 0 has radius 1, cell 1 radius 2
    tube = build_tube(ALTERNATING, seed=0)

    # Act
    up = tube.step_at(1)
    down = tube.step_at(2)
    patches = band_patches(tube, 0)

    # Assert
    assert (up.kind, up.inner, up.outer, up.facing) == (STEP, 1.0, 2.0, 1)
    assert (down.inner, down.outer, down.facing) == (1.0, 2.0, -1)
    assert [p.kind for p, _ in patches] == [LATERAL, STEP]
    assert band_measure(tube, 0) == pytest.approx(2 * math.pi + 3 * math.pi)
    assert band_measure(tube, 1) == pytest.approx(4 * math.pi + 3 * math.pi)


def test_run_bounds_of_alternating_tube():
    tube = build_tube(ALTERNATING, seed=0)

    assert tube.run_bounds(1, 16) == (1.0, 2.0)
    assert tube.run_bounds(4, 16) == (4.0, 5.0)


def test_tube_radius_sequence_is_seeded():
    spec = {"driver": "iid", "radii": [1.0, 0.6, 0.8]}

    a = build_tube(spec, seed=4)
    b = build_tube(spec, seed=4)

    assert a.radius_sequence(-50, 50).tolist() == b.radius_sequence(-50, 50).tolist()
    assert set(a.radius_sequence(-500, 500).tolist()) == {1.0, 0.6, 0.8}


def test_tube_spec_errors():
    with pytest.raises(TubeSpecError):
        build_tube({"radii": []}, seed=0)
    with pytest.raises(TubeSpecError):
        build_tube({"radii": [1.0], "r_min": 2.0}, seed=0)
    with pytest.raises(TubeSpecError):
        build_tube({"radii": [1.0, 2.0], "driver": "constant"}, seed=0)


def test_inner_normals():
    tube = build_tube(ALTERNATING, seed=0)
    lateral = BoundaryPoint(alpha=0.5, patch=Patch(kind=LATERAL, index=0), angle=math.pi / 2, radial=1.0)
    annulus = BoundaryPoint(alpha=1.0, patch=tube.step_at(1), angle=0.0, radial=1.5)

    np.testing.assert_allclose(inner_normal(tube, lateral), [0.0, 0.0, -1.0], atol=1e-15)
    np.testing.assert_allclose(inner_normal(tube, annulus), [1.0, 0.0, 0.0])


def test_edge_circle_has_no_normal():
    tube = build_tube(ALTERNATING, seed=0)
    edge = BoundaryPoint(alpha=1.0, patch=Patch(kind=LATERAL, index=0), angle=0.0, radial=1.0)
    rim = BoundaryPoint(alpha=1.0, patch=tube.step_at(1), angle=0.0, radial=2.0)

    with pytest.raises(NonRegularPointError):
        inner_normal(tube, edge)
    with pytest.raises(NonRegularPointError):
        inner_normal(tube, rim)


def test_uniform_boundary_samples_lie_on_their_band():
    # Arrange
    tube = build_tube(ALTERNATING, seed=0)
    gen = np.random.Generator(np.random.PCG64(5))

    # Act
    points = [sample_boundary_uniform(tube, 0, gen) for _ in range(4000)]

    # Assert
    assert all(p.band == 0 for p in points)
    assert max(boundary_residual(tube, p) for p in points) < 1e-12
    on_step = np.mean([p.patch.kind == STEP for p in points])
    assert on_step == pytest.approx(3 / 5, abs=0.03)


def test_uniform_boundary_sample_is_reproducible_from_a_seed():
    tube = build_tube(ALTERNATING, seed=0)

    a = sample_boundary_uniform(tube, 3, 99)
    b = sample_boundary_uniform(tube, 3, 99)

    assert a == b
    np.testing.assert_allclose(embed(a), embed(b))
