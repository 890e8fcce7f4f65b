"""Tolerance-aware 3D and planar primitives.

Points are plain ``numpy`` arrays of shape ``(3,)``. All predicates compare
signed distances against ``Tolerance.eps_len`` or dot products against
``Tolerance.eps_ang``; nothing here calls inverse trigonometric functions.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateGeometryError

DEFAULT_EPS_REL = 1e-9
DEFAULT_EPS_ANG = 1e-9


@dataclass(frozen=True)
class Tolerance:
    """Length and angle thresholds.

    ``eps_ang`` is a threshold on dot products of unit vectors (or on sines
    of small angles), not an angle in radians.
    """

    eps_len: float = DEFAULT_EPS_REL
    eps_ang: float = DEFAULT_EPS_ANG

    def __post_init__(self):
        if not (self.eps_len > 0 and self.eps_ang > 0):
            raise ValueError("tolerances must be strictly positive")

    @classmethod
    def for_points(cls, points, rel: float = DEFAULT_EPS_REL,
                   eps_ang: float = DEFAULT_EPS_ANG) -> "Tolerance":
        """Scale-aware default: ``eps_len = rel * bounding-box diameter``."""
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        diam = float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))
        return cls(eps_len=rel * max(diam, np.finfo(float).tiny), eps_ang=eps_ang)

    def as_dict(self) -> dict:
        return {"eps_len": self.eps_len, "eps_ang": self.eps_ang}


class Location(str, Enum):
    INSIDE = "inside"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


def classify_margin(margin: float, eps: float) -> Location:
    """Three-way verdict for a signed margin (positive = inside)."""
    if margin >= eps:
        return Location.INSIDE
    if margin > -eps:
        return Location.BOUNDARY
    return Location.OUTSIDE


@dataclass(frozen=True)
class Plane:
    """Oriented plane ``{x : unit_normal . x = offset}``."""

    unit_normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = np.asarray(self.unit_normal, dtype=float)
        norm = np.linalg.norm(n)
        if not np.isfinite(norm) or abs(norm - 1.0) > 1e-6:
            raise ValueError("plane normal must be a unit vector")
        object.__setattr__(self, "unit_normal", n)
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def through(cls, point, normal) -> "Plane":
        n = unit(normal)
        return cls(n, float(n @ np.asarray(point, dtype=float)))

    def signed_distance(self, p) -> float:
        return float(self.unit_normal @ np.asarray(p, dtype=float) - self.offset)


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0 or not np.isfinite(n):
        raise DegenerateGeometryError("cannot normalize a zero or non-finite vector")
    return v / n


def orthonormal_basis(normal) -> tuple[np.ndarray, np.ndarray]:
    """Two unit vectors ``u, w`` with ``u x w = normal``."""
    n = unit(normal)
    helper = np.eye(3)[int(np.argmin(np.abs(n)))]
    u = unit(np.cross(helper, n))
    w = np.cross(n, u)
    return u, w


def project_to_plane(p, h: Plane) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return p - h.signed_distance(p) * h.unit_normal


def foot_on_segment(p, a, b, tol: Tolerance) -> np.ndarray | None:
    """Orthogonal foot of ``p`` on line ``ab`` if it is strictly inside the segment."""
    p, a, b = (np.asarray(x, dtype=float) for x in (p, a, b))
    ab = b - a
    length = float(np.linalg.norm(ab))
    if length < tol.eps_len:
        raise DegenerateGeometryError("degenerate segment")
    s = float((p - a) @ ab) / length  # arclength of the foot from a
    if s < tol.eps_len or length - s < tol.eps_len:
        return None
    return a + (s / length) * ab


def point_in_convex_polygon(p, polygon, carrier: Plane, tol: Tolerance) -> Location:
    """Locate ``p`` (projected onto ``carrier``) relative to a convex polygon.

    The polygon must be planar and counterclockwise about ``carrier.unit_normal``.
    """
    poly = np.asarray(polygon, dtype=float)
    if len(poly) < 3:
        raise DegenerateGeometryError("polygon needs at least three vertices")
    n = carrier.unit_normal
    if np.max(np.abs(poly @ n - carrier.offset)) > tol.eps_len:
        raise DegenerateGeometryError("polygon is not planar")
    nxt = np.roll(poly, -1, axis=0)
    edges = nxt - poly
    lengths = np.linalg.norm(edges, axis=1)
    if np.any(lengths < tol.eps_len):
        raise DegenerateGeometryError("polygon has a zero-length edge")
    turns = np.cross(edges, np.roll(edges, -1, axis=0)) @ n
    if np.any(turns <= 0):
        raise DegenerateGeometryError("polygon is not strictly convex and counterclockwise")
    q = project_to_plane(p, carrier)
    margins = (np.cross(edges, q - poly) @ n) / lengths
    return classify_margin(float(margins.min()), tol.eps_len)


def clip_polygon(poly: np.ndarray, normal, offset: float) -> np.ndarray:
    """Clip a convex polygon (any dimension) to the half-space ``normal . x <= offset``."""
    if len(poly) == 0:
        return poly
    d = poly @ np.asarray(normal, dtype=float) - offset
    out = []
    k = len(poly)
    for i in range(k):
        j = (i + 1) % k
        p, q, dp, dq = poly[i], poly[j], d[i], d[j]
        if dp <= 0:
            out.append(p)
        if (dp < 0 < dq) or (dq < 0 < dp):
            out.append(p + (dp / (dp - dq)) * (q - p))
    if not out:
        return poly[:0]
    return np.array(out)


def polygon_area_2d(poly: np.ndarray) -> float:
    if len(poly) < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(x @ np.roll(y, -1) - y @ np.roll(x, -1))


def convex_hull_2d(pts: np.ndarray, eps: float) -> list[int]:
    """Counterclockwise indices of strict corners of the 2D hull (monotone chain)."""
    order = sorted(range(len(pts)), key=lambda i: (pts[i, 0], pts[i, 1]))

    def cross(o, a, b):
        return ((pts[a, 0] - pts[o, 0]) * (pts[b, 1] - pts[o, 1])
                - (pts[a, 1] - pts[o, 1]) * (pts[b, 0] - pts[o, 0]))

    def chain(seq):
        out: list[int] = []
        for i in seq:
            while len(out) >= 2:
                o, a = out[-2], out[-1]
                base = np.linalg.norm(pts[i] - pts[o])
                # drop `a` unless it is a left turn by more than eps
                if cross(o, a, i) <= eps * max(base, eps):
                    out.pop()
                else:
                    break
            out.append(i)
        return out

    lower = chain(order)
    upper = chain(reversed(order))
    return lower[:-1] + upper[:-1]
