# src/walklab/tube/ray.py
"""
Exact chord tracing inside a tube.

The ray is advanced run by run (maximal stretches of equal radius). Inside a run the
only reachable boundary is the cylinder wall, whose hit is the larger root of
|u + t w_perp|^2 = R^2. At the plane ending the run the ray either meets the annulus
(radial position at least the next radius) or passes into the next run.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from walklab.tube.tube import LATERAL, BoundaryPoint, Patch, Tube, embed, inner_normal

logger = logging.getLogger(__name__)

DISC_TOL = 1e-12
EDGE_TOL = 1e-12
DEFAULT_MAX_CELLS = 1_000_000
RUN_LOOKAHEAD = 256


class DegenerateRayError(RuntimeError):
    pass


class WindowExhaustedError(RuntimeError):
    pass


def _wall_root(y0: float, z0: float, wy: float, wz: float, radius: float) -> float:
    """Largest t with |(y0, z0) + t (wy, wz)| = radius; inf for a ray parallel to the axis."""
    a = wy * wy + wz * wz
    if a < 1e-300:
        return math.inf
    b = y0 * wy + z0 * wz
    c = y0 * y0 + z0 * z0 - radius * radius
    disc = b * b - a * c
    if disc < DISC_TOL:
        raise DegenerateRayError(f"tangent ray (discriminant {disc:.3e})")
    # both roots without cancellation
    q = -(b + math.copysign(math.sqrt(disc), b))
    roots = [q / a, c / q] if q != 0.0 else [0.0]
    return max(roots)


def _start_cell(p: BoundaryPoint) -> int:
    if p.patch.kind == LATERAL:
        return p.patch.index
    return p.patch.index if p.patch.facing > 0 else p.patch.index - 1


def ray_exit(
    tube: Tube, p: BoundaryPoint, w: np.ndarray, max_cells: int = DEFAULT_MAX_CELLS
) -> tuple[BoundaryPoint, float]:
    """
    First boundary point seen from ``p`` in direction ``w``, with the chord length.

    Raises DegenerateRayError on tangent rays and edge hits, WindowExhaustedError when the
    ray travels more than ``max_cells`` cells along the axis.
    """
    w = np.asarray(w, dtype=float)
    n = inner_normal(tube, p)
    if float(np.dot(w, n)) <= 0.0:
        raise ValueError(f"direction {w} does not point into the tube at {p.patch.label()}")

    alpha0, y0, z0 = embed(p)
    w_alpha, wy, wz = float(w[0]), float(w[1]), float(w[2])
    cell = _start_cell(p)
    lookahead = min(RUN_LOOKAHEAD, max_cells)

    while True:
        radius = tube.cell_radius(cell)
        lo, hi = tube.run_bounds(cell, lookahead)
        t_wall = _wall_root(y0, z0, wy, wz, radius)
        a_wall = alpha0 + t_wall * w_alpha
        if lo <= a_wall <= hi:
            if abs(a_wall - alpha0) > max_cells:
                raise WindowExhaustedError(f"ray from alpha={alpha0:.3f} left the {max_cells}-cell window")
            for end in (lo, hi):
                if abs(a_wall - end) < EDGE_TOL and math.isfinite(end) and tube.step_at(int(end)) is not None:
                    raise DegenerateRayError(f"ray hits the edge circle at alpha={end}")
            ys, zs = y0 + t_wall * wy, z0 + t_wall * wz
            angle = math.atan2(zs, ys) % (2.0 * math.pi)
            hit_cell = min(max(math.floor(a_wall), lo), hi - 1)
            point = BoundaryPoint(alpha=a_wall, patch=Patch(kind=LATERAL, index=int(hit_cell)), angle=angle, radial=radius)
            return point, t_wall

        # the ray leaves the run through one of its end planes
        plane = hi if w_alpha > 0 else lo
        if abs(plane - alpha0) > max_cells:
            raise WindowExhaustedError(f"ray from alpha={alpha0:.3f} left the {max_cells}-cell window")
        t_plane = (plane - alpha0) / w_alpha
        yp, zp = y0 + t_plane * wy, z0 + t_plane * wz
        radial = math.hypot(yp, zp)
        next_cell = int(plane) if w_alpha > 0 else int(plane) - 1
        next_radius = tube.cell_radius(next_cell)
        if next_radius == radius:
            cell = next_cell
            continue
        if min(abs(radial - next_radius), abs(radial - radius)) < EDGE_TOL:
            raise DegenerateRayError(f"ray hits the edge circle at alpha={plane}")
        if radial > next_radius:
            step = tube.step_at(int(plane))
            point = BoundaryPoint(
                alpha=float(plane), patch=step, angle=math.atan2(zp, yp) % (2.0 * math.pi), radial=radial
            )
            return point, t_plane
        cell = next_cell


def visibility_roundtrip(tube: Tube, p: BoundaryPoint, w: np.ndarray) -> float:
    """Distance between ``p`` and the point seen back from the exit of ``p`` along ``-w``."""
    q, _ = ray_exit(tube, p, w)
    back, _ = ray_exit(tube, q, -np.asarray(w, dtype=float))
    return float(np.linalg.norm(embed(back) - embed(p)))


def chord_axial_length(p: BoundaryPoint, q: BoundaryPoint) -> float:
    return q.alpha - p.alpha


__all__ = [
    "DegenerateRayError",
    "WindowExhaustedError",
    "ray_exit",
    "visibility_roundtrip",
    "chord_axial_length",
]
