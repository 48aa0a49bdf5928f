import math

import numpy as np
import pytest

from walklab.tube import (
    LATERAL,
    STEP,
    BoundaryPoint,
    Patch,
    WindowExhaustedError,
    boundary_residual,
    build_tube,
    chord_axial_length,
    embed,
    ray_exit,
    visibility_roundtrip,
)

UNIT = {"radii": [1.0]}
ALTERNATING = {"driver": "periodic", "radii": [1.0, 2.0]}


def _lateral(alpha, angle, radius, index=None):
    return BoundaryPoint(
        alpha=alpha,
        patch=Patch(kind=LATERAL, index=math.floor(alpha) if index is None else index),
        angle=angle,
        radial=radius,
    )


def test_diameter_chord_of_unit_cylinder():
    # Arrange
    tube = build_tube(UNIT, seed=0)
    p = _lateral(0.5, 0.0, 1.0)

    # Act
    q, chord = ray_exit(tube, p, np.array([0.0, -1.0, 0.0]))

    # Assert
    assert chord == pytest.approx(2.0)
    assert q.alpha == pytest.approx(0.5)
    assert q.angle == pytest.approx(math.pi)
    assert q.patch.kind == LATERAL


def test_oblique_chord_advances_along_the_axis():
    tube = build_tube(UNIT, seed=0)
    p = _lateral(0.5, 0.0, 1.0)
    w = np.array([1.0, -1.0, 0.0]) / math.sqrt(2.0)

    q, chord = ray_exit(tube, p, w)

    assert chord == pytest.approx(2.0 * math.sqrt(2.0))
    assert q.alpha == pytest.approx(2.5)
    assert q.patch.index == 2
    assert chord_axial_length(p, q) == pytest.approx(2.0)
    assert boundary_residual(tube, q) < 1e-12


def test_ray_hits_the_annulus_of_a_narrowing():
    # Arrange: from the wide cell 1 heading left, the plane alpha = 1 is met at radial 1.9
    tube = build_tube(ALTERNATING, seed=0)
    p = _lateral(1.5, 0.0, 2.0)
    w = np.array([-1.0, -0.2, 0.0])
    w /= np.linalg.norm(w)

    # Act
    q, chord = ray_exit(tube, p, w)

    # Assert
    assert q.patch.kind == STEP
    assert q.alpha == 1.0
    assert q.radial == pytest.approx(1.9)
    assert chord == pytest.approx(0.5 * math.sqrt(1.04))
    assert boundary_residual(tube, q) < 1e-12


def test_ray_passes_through_a_widening():
    # Arrange: from the narrow cell 0 heading right the ray enters cell 1 and hits its wall
    tube = build_tube(ALTERNATING, seed=0)
    p = _lateral(0.5, 0.0, 1.0)
    w = np.array([1.0, -0.5, 0.0])
    w /= np.linalg.norm(w)

    q, _ = ray_exit(tube, p, w)

    # at alpha = 1 the radial position is 0.75 < 1, so the ray goes on into cell 1
    assert q.patch.kind in (LATERAL, STEP)
    assert q.alpha > 1.0
    assert boundary_residual(tube, q) < 1e-12


@pytest.mark.parametrize(
    "p_alpha, p_angle, radius, w",
    [
        (0.5, 0.0, 1.0, (0.0, -1.0, 0.0)),
        (0.5, 0.3, 1.0, (0.7, -0.6, -0.2)),
        (1.5, 0.0, 2.0, (-1.0, -0.2, 0.0)),
        (1.25, 2.0, 2.0, (0.4, 0.3, -0.9)),
    ],
)
def test_visibility_round_trip(p_alpha, p_angle, radius, w):
    tube = build_tube(ALTERNATING, seed=0)
    p = _lateral(p_alpha, p_angle, radius)
    w = np.asarray(w, dtype=float)
    w /= np.linalg.norm(w)

    assert visibility_roundtrip(tube, p, w) < 1e-9


def test_direction_must_point_inside():
    tube = build_tube(UNIT, seed=0)
    p = _lateral(0.5, 0.0, 1.0)

    with pytest.raises(ValueError, match="does not point into"):
        ray_exit(tube, p, np.array([0.0, 1.0, 0.0]))


def test_long_chord_exhausts_the_window():
    tube = build_tube(UNIT, seed=0)
    p = _lateral(0.5, 0.0, 1.0)
    w = np.array([1.0, -1e-3, 0.0])
    w /= np.linalg.norm(w)

    with pytest.raises(WindowExhaustedError):
        ray_exit(tube, p, w, max_cells=100)


def test_embed_coordinates():
    p = _lateral(0.25, math.pi / 2, 2.0)

    np.testing.assert_allclose(embed(p), [0.25, 0.0, 2.0], atol=1e-15)
