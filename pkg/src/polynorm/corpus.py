"""Seeded instance generators for tests, the acceptance suite and the CLI."""
from __future__ import annotations

import numpy as np

from .errors import DegenerateGeometryError
from .geom import Tolerance
from .polytope import Polytope, random_sphere_hull
from .spherical import SphericalPolygon, triangle_criterion


def polytope_corpus(count: int = 50, seed: int = 0, sizes=range(6, 17)) -> list[Polytope]:
    """Generic hulls of points on the unit sphere; sizes cycle through ``sizes``."""
    sizes = list(sizes)
    return [random_sphere_hull(sizes[i % len(sizes)], seed=(seed, i)) for i in range(count)]


def _frame(c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    helper = np.eye(3)[int(np.argmin(np.abs(c)))]
    u = np.cross(c, helper)
    u /= np.linalg.norm(u)
    return u, np.cross(c, u)


def random_spherical_polygon(rng: np.random.Generator, n_range=(3, 8),
                             radius_range=(0.3, 1.3), tol: Tolerance = Tolerance()) -> SphericalPolygon:
    """Convex polygon with vertices on a jittered circle of random angular radius."""
    for _ in range(1000):
        k = int(rng.integers(n_range[0], n_range[1] + 1))
        c = rng.normal(size=3)
        c /= np.linalg.norm(c)
        u, w = _frame(c)
        rho = rng.uniform(*radius_range) * rng.uniform(0.6, 1.0, size=k)
        phi = np.sort(rng.uniform(0, 2 * np.pi, size=k))
        pts = (np.cos(rho)[:, None] * c
               + np.sin(rho)[:, None] * (np.cos(phi)[:, None] * u + np.sin(phi)[:, None] * w))
        try:
            return SphericalPolygon.from_points(pts, tol)
        except DegenerateGeometryError:
            continue
    raise RuntimeError("could not draw a convex spherical polygon")


def _rotate_towards(p: np.ndarray, q_dir: np.ndarray, angle: float) -> np.ndarray:
    """Point at ``angle`` from ``p`` along the tangent direction ``q_dir``."""
    t = q_dir - (q_dir @ p) * p
    t /= np.linalg.norm(t)
    return np.cos(angle) * p + np.sin(angle) * t


def skew_triangle(rng: np.random.Generator, tol: Tolerance = Tolerance(),
                  max_tries: int = 100000) -> tuple[SphericalPolygon, tuple[int, int, int]]:
    """Rejection sampler for triangles meeting the skew-triangle conditions.

    Returns the polygon and the labelling ``(A, B, C)`` of its vertices.
    """
    for _ in range(max_tries):
        B = rng.normal(size=3)
        B /= np.linalg.norm(B)
        u, w = _frame(B)
        bc = rng.uniform(0.15, np.pi / 2 - 0.05)
        C = _rotate_towards(B, u, bc)
        # A leaves B at an obtuse angle to BC, far from B
        theta = rng.uniform(np.pi / 2 + 0.05, np.pi - 0.2)
        ba = rng.uniform(np.pi / 2 + 0.02, np.pi - 0.3)
        A = _rotate_towards(B, np.cos(theta) * u + np.sin(theta) * w, ba)
        pts = np.array([A, B, C])
        if np.cross(A, B) @ C < 0:
            pts = pts[::-1]
        try:
            Q = SphericalPolygon.from_points(pts, tol)
        except DegenerateGeometryError:
            continue
        labels = triangle_criterion(Q, tol)
        if labels is not None:
            return Q, labels
    raise RuntimeError("no skew triangle found")
