# src/walklab/tube/tube.py
"""
Rotationally symmetric random tubes in R^3 with piecewise-constant radius.

The axis is e = (1, 0, 0). Cell i is the cylinder over [i, i+1) with radius R(i);
where R changes at the integer i the boundary has an annulus ("step") in the plane
alpha = i between the two radii.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from walklab.process import Driver, DriverSpecError, StateSequence, build_driver
from walklab.utils.seeding import make_rng

logger = logging.getLogger(__name__)

LATERAL = "lateral"
STEP = "step"


class TubeSpecError(ValueError):
    pass


class NonRegularPointError(ValueError):
    pass


@dataclass(frozen=True)
class RadiusProcess:
    driver: Driver
    radii: tuple[float, ...]
    r_min: float
    M_hat: float

    def __post_init__(self) -> None:
        if len(self.radii) != self.driver.n_states:
            raise TubeSpecError(f"{len(self.radii)} radii for a driver with {self.driver.n_states} states")
        if not 0.0 < self.r_min <= self.M_hat:
            raise TubeSpecError(f"need 0 < r_min <= M_hat, got {self.r_min}, {self.M_hat}")
        for r in self.radii:
            if not self.r_min <= r <= self.M_hat:
                raise TubeSpecError(f"radius {r} outside [{self.r_min}, {self.M_hat}]")

    def spec(self) -> dict[str, Any]:
        out = dict(self.driver.spec())
        out.update({"radii": list(self.radii), "r_min": self.r_min, "M_hat": self.M_hat})
        return out


@dataclass(frozen=True)
class Patch:
    kind: str
    index: int
    inner: float = 0.0
    outer: float = 0.0
    facing: int = 0

    def label(self) -> str:
        if self.kind == LATERAL:
            return f"lateral({self.index})"
        return f"step({self.index},{self.inner},{self.outer},{'+' if self.facing > 0 else '-'}e)"


@dataclass(frozen=True)
class BoundaryPoint:
    alpha: float
    patch: Patch
    angle: float
    radial: float

    @property
    def band(self) -> int:
        """j with alpha in (j, j+1]."""
        return math.ceil(self.alpha) - 1


class Tube:
    """Tube for one seed; the radius sequence is materialized lazily and is safe to share."""

    def __init__(self, process: RadiusProcess, seed: int) -> None:
        self.process = process
        self.seed = int(seed)
        self._sequence = StateSequence(process.driver, self.seed)
        self._radii = np.asarray(process.radii, dtype=float)
        self.constant = len(set(process.radii)) == 1

    def cell_radius(self, i: int) -> float:
        if self.constant:
            return self.process.radii[0]
        return float(self._radii[self._sequence.state_at(int(i))])

    def radius_at(self, alpha: float) -> float:
        return self.cell_radius(math.floor(alpha))

    def radius_sequence(self, lo: int, hi: int) -> np.ndarray:
        """Radii of cells ``lo .. hi-1``."""
        return self._radii[self._sequence.window(int(lo), int(hi))]

    def step_at(self, i: int) -> Patch | None:
        """The annulus in the plane alpha = i, if the radius changes there."""
        left, right = self.cell_radius(i - 1), self.cell_radius(i)
        if left == right:
            return None
        return Patch(kind=STEP, index=int(i), inner=min(left, right), outer=max(left, right), facing=1 if right > left else -1)

    def run_bounds(self, cell: int, limit: int) -> tuple[float, float]:
        """
        Axial interval [a, b) of constant radius containing ``cell``, looking at most
        ``limit`` cells each way (an unchanged radius beyond that is reported as a boundary).
        """
        if self.constant:
            return -math.inf, math.inf
        r = self.cell_radius(cell)
        radii = self.radius_sequence(cell - limit, cell + limit + 1)
        centre = limit
        right = np.flatnonzero(radii[centre:] != r)
        left = np.flatnonzero(radii[: centre + 1][::-1] != r)
        hi = cell + (int(right[0]) if len(right) else limit + 1)
        lo = cell - (int(left[0]) - 1 if len(left) else limit)
        return float(lo), float(hi)

    def radius_rows(self, lo: int, hi: int) -> list[tuple[int, float]]:
        return list(zip(range(lo, hi), self.radius_sequence(lo, hi).tolist()))

    def spec(self) -> dict[str, Any]:
        return self.process.spec()

    def __repr__(self) -> str:
        return f"Tube(driver={self.process.driver.kind}, radii={self.process.radii}, seed={self.seed})"


def build_tube(spec: Mapping[str, Any], seed: int) -> Tube:
    """
    Build a tube from ``{"driver": ..., "radii": [...], "r_min": ..., "M_hat": ...}``.

    ``r_min`` and ``M_hat`` default to the smallest and largest radius.
    """
    radii = spec.get("radii")
    if not radii:
        raise TubeSpecError("tube spec needs a non-empty 'radii' list")
    try:
        radii = tuple(float(r) for r in radii)
    except (TypeError, ValueError) as e:
        raise TubeSpecError(f"radii must be numbers: {e}") from e
    driver_spec = dict(spec)
    driver_spec.setdefault("driver", "constant" if len(radii) == 1 else "periodic")
    try:
        driver = build_driver(driver_spec, len(radii))
    except DriverSpecError as e:
        raise TubeSpecError(str(e)) from e
    process = RadiusProcess(
        driver=driver,
        radii=radii,
        r_min=float(spec.get("r_min", min(radii))),
        M_hat=float(spec.get("M_hat", max(radii))),
    )
    tube = Tube(process, seed)
    logger.debug(f"Built {tube!r}")
    return tube


def embed(p: BoundaryPoint) -> np.ndarray:
    return np.array([p.alpha, p.radial * math.cos(p.angle), p.radial * math.sin(p.angle)])


def inner_normal(tube: Tube, p: BoundaryPoint) -> np.ndarray:
    """Unit normal at ``p`` pointing into the tube; edge circles are rejected."""
    if p.patch.kind == LATERAL:
        if float(p.alpha).is_integer() and tube.step_at(int(p.alpha)) is not None:
            raise NonRegularPointError(f"lateral point on the edge circle alpha={p.alpha}")
        return np.array([0.0, -math.cos(p.angle), -math.sin(p.angle)])
    if p.radial <= p.patch.inner or p.radial >= p.patch.outer:
        raise NonRegularPointError(f"step point on an edge circle (radial={p.radial})")
    return np.array([float(p.patch.facing), 0.0, 0.0])


def boundary_residual(tube: Tube, p: BoundaryPoint) -> float:
    """Distance of the embedded point from the boundary equation of its patch."""
    x = embed(p)
    r = math.hypot(x[1], x[2])
    if p.patch.kind == LATERAL:
        axial = max(0.0, p.patch.index - p.alpha, p.alpha - (p.patch.index + 1))
        return max(abs(r - tube.cell_radius(p.patch.index)), axial)
    outside = max(0.0, p.patch.inner - r, r - p.patch.outer)
    return max(abs(p.alpha - p.patch.index), outside)


def band_patches(tube: Tube, j: int) -> list[tuple[Patch, float]]:
    """Patches of the band alpha in (j, j+1] with their areas: lateral cell j and the annulus at j+1."""
    r = tube.cell_radius(j)
    out = [(Patch(kind=LATERAL, index=int(j)), 2.0 * math.pi * r)]
    step = tube.step_at(j + 1)
    if step is not None:
        out.append((step, math.pi * (step.outer**2 - step.inner**2)))
    return out


def band_measure(tube: Tube, j: int) -> float:
    return math.fsum(area for _, area in band_patches(tube, j))


def pi_measure(tube: Tube, j: int, lam: float) -> float:
    """Mass of the band under e^{lam alpha} times surface measure."""
    total = []
    for patch, area in band_patches(tube, j):
        if patch.kind == LATERAL:
            if lam == 0.0:
                total.append(area)
            else:
                total.append(area * math.exp(lam * j) * math.expm1(lam) / lam)
        else:
            total.append(area * math.exp(lam * (j + 1)))
    return math.fsum(total)


def _as_rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return make_rng(int(seed_or_rng))


def sample_boundary_uniform(tube: Tube, j: int, seed_or_rng) -> BoundaryPoint:
    """Point of band j distributed as surface measure restricted to the band."""
    rng = _as_rng(seed_or_rng)
    patches = band_patches(tube, j)
    areas = np.array([a for _, a in patches])
    u_patch, u1, u2 = rng.random(3)
    k = int(np.searchsorted(np.cumsum(areas) / areas.sum(), u_patch, side="right"))
    patch = patches[min(k, len(patches) - 1)][0]
    angle = 2.0 * math.pi * u2
    if patch.kind == LATERAL:
        # (j, j+1]; u1 in [0, 1)
        return BoundaryPoint(alpha=j + 1.0 - u1, patch=patch, angle=angle, radial=tube.cell_radius(j))
    r2 = patch.inner**2 + u1 * (patch.outer**2 - patch.inner**2)
    return BoundaryPoint(alpha=float(patch.index), patch=patch, angle=angle, radial=math.sqrt(r2))
