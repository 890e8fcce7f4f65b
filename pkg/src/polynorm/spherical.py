"""Spherical vertex figures and the nice/skew classification.

A vertex figure is the convex spherical polygon of directions from a vertex
into the polytope. For a query direction ``Y`` inside it, the spherical
distance to ``Y`` restricted to the polygon boundary has short maxima at
vertices and short minima at interior points of edges; a polygon is *nice*
if some ``Y`` has at least three short maxima.

Every region "vertex A is a short maximum for Y" is an intersection of four
open hemispheres with the polygon, so it is a convex polygon in a gnomonic
chart. Niceness is decided exactly by intersecting these regions three at a
time; the grid sampler is kept as a configurable semi-decision.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import DegenerateGeometryError, NumericalAnomaly, OnSheetError, PointOutsideError
from .geom import Tolerance, clip_polygon, orthonormal_basis, polygon_area_2d

HALF_PI = 0.5 * np.pi


def sph_distance(X, Y) -> float:
    return float(np.arccos(np.clip(np.dot(X, Y), -1.0, 1.0)))


def tangent(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Unit tangent at ``a`` of the geodesic from ``a`` toward ``b``."""
    t = b - (a @ b) * a
    n = np.linalg.norm(t)
    if n == 0:
        raise DegenerateGeometryError("coincident or antipodal points")
    return t / n


def hemisphere_witness(pts: np.ndarray, eps: float) -> np.ndarray | None:
    """Unit ``d`` with ``d . p > eps`` for all ``p``, or None."""
    c = pts.sum(axis=0)
    if np.linalg.norm(c) > 0:
        c = c / np.linalg.norm(c)
        if np.min(pts @ c) > eps:
            return c
    res = linprog(c=[0, 0, 0, -1.0], A_ub=np.column_stack([-pts, np.ones(len(pts))]),
                  b_ub=np.zeros(len(pts)), bounds=[(-1, 1)] * 3 + [(None, 1)], method="highs")
    if not res.success or res.x[3] <= 0:
        return None
    d = res.x[:3] / np.linalg.norm(res.x[:3])
    return d if np.min(pts @ d) > eps else None


class Chart:
    """Gnomonic chart centred at a unit vector; geodesics map to lines."""

    def __init__(self, center: np.ndarray):
        self.center = center / np.linalg.norm(center)
        self.e1, self.e2 = orthonormal_basis(self.center)

    def to_chart(self, Y: np.ndarray) -> np.ndarray:
        Y = np.atleast_2d(Y)
        z = Y @ self.center
        return np.column_stack([Y @ self.e1, Y @ self.e2]) / z[:, None]

    def from_chart(self, xy: np.ndarray) -> np.ndarray:
        xy = np.atleast_2d(xy)
        Y = self.center + xy[:, :1] * self.e1 + xy[:, 1:2] * self.e2
        return Y / np.linalg.norm(Y, axis=1)[:, None]

    def halfplane(self, n: np.ndarray, margin: float = 0.0) -> tuple[np.ndarray, float]:
        """``n . Y > margin`` as ``normal . xy <= offset`` (for ``clip_polygon``)."""
        a, b, c = n @ self.e1, n @ self.e2, n @ self.center
        return np.array([-a, -b]), c - margin * np.hypot(a, b)


@dataclass(frozen=True)
class SphericalPolygon:
    """Convex spherical polygon, counterclockwise about its interior.

    ``poles[i]`` is the unit pole of edge ``vertices[i] -> vertices[i+1]``
    with the interior on its positive side. For vertex figures ``edge_ids[i]``
    is the polytope edge through polygon vertex ``i`` and ``face_ids[i]`` the
    face carrying polygon edge ``i``.
    """

    vertices: np.ndarray
    poles: np.ndarray
    witness: np.ndarray
    source_vertex: int | None = None
    edge_ids: tuple[int, ...] | None = None
    face_ids: tuple[int, ...] | None = None

    @classmethod
    def from_points(cls, pts, tol: Tolerance = Tolerance(), **source) -> "SphericalPolygon":
        V = np.asarray(pts, dtype=float)
        if V.ndim != 2 or V.shape[1] != 3 or len(V) < 3:
            raise DegenerateGeometryError("need at least three unit vectors")
        V = V / np.linalg.norm(V, axis=1)[:, None]
        w = hemisphere_witness(V, tol.eps_ang)
        if w is None:
            raise DegenerateGeometryError("polygon does not fit an open hemisphere")
        nxt = np.roll(V, -1, axis=0)
        if np.sum(np.cross(V, nxt) @ w) < 0:
            raise DegenerateGeometryError("polygon is clockwise about its interior")
        if np.any(np.einsum("ij,ij->i", V, nxt) <= -1 + tol.eps_ang):
            raise DegenerateGeometryError("edge of length pi")
        poles = np.cross(V, nxt)
        norms = np.linalg.norm(poles, axis=1)
        if np.any(norms < tol.eps_ang):
            raise DegenerateGeometryError("degenerate edge")
        poles /= norms[:, None]
        k = len(V)
        side = V @ poles.T  # side[j, i] = v_j . pole_i
        for i in range(k):
            others = [j for j in range(k) if j not in (i, (i + 1) % k)]
            if np.any(side[others, i] <= tol.eps_ang):
                raise DegenerateGeometryError("polygon is not strictly convex")
        return cls(V, poles, w, **source)

    @property
    def n(self) -> int:
        return len(self.vertices)

    def tangents(self) -> tuple[np.ndarray, np.ndarray]:
        """Unit tangents at each vertex toward the next and the previous vertex."""
        V = self.vertices
        k = self.n
        t_next = np.array([tangent(V[i], V[(i + 1) % k]) for i in range(k)])
        t_prev = np.array([tangent(V[i], V[i - 1]) for i in range(k)])
        return t_next, t_prev

    def angle_cosines(self) -> np.ndarray:
        t_next, t_prev = self.tangents()
        return np.einsum("ij,ij->i", t_next, t_prev)

    def interior_angles(self) -> np.ndarray:
        return np.arccos(np.clip(self.angle_cosines(), -1, 1))

    def acute_vertices(self, tol: Tolerance = Tolerance()) -> list[int]:
        return [i for i, c in enumerate(self.angle_cosines()) if c > tol.eps_ang]

    def interior_margin(self, Y) -> float:
        return float(np.min(self.poles @ np.asarray(Y, dtype=float)))

    def contains(self, Y, tol: Tolerance = Tolerance()) -> bool:
        return self.interior_margin(Y) > tol.eps_ang

    def chart(self) -> Chart:
        return Chart(self.witness)

    def rotated(self, R: np.ndarray) -> "SphericalPolygon":
        return SphericalPolygon(self.vertices @ R.T, self.poles @ R.T, self.witness @ R.T,
                                self.source_vertex, self.edge_ids, self.face_ids)

    def on_edge_arc(self, i: int, X: np.ndarray, eps: float) -> float:
        """Margin by which ``X`` (on the great circle of edge i) is inside the arc."""
        a, b, p = self.vertices[i], self.vertices[(i + 1) % self.n], self.poles[i]
        return min(float(np.cross(a, X) @ p), float(np.cross(X, b) @ p))


def vertex_figure(P, v: int) -> SphericalPolygon:
    """Spherical polygon of edge directions at vertex ``v`` of polytope ``P``."""
    faces = P.vertex_faces[v]
    if len(faces) < 3:
        raise DegenerateGeometryError("vertex with fewer than 3 faces")
    succ: dict[int, tuple[int, int]] = {}
    for f in faces:
        cyc = P.faces[f].vertices
        k = cyc.index(v)
        succ[cyc[(k + 1) % len(cyc)]] = (cyc[k - 1], f)
    start = min(succ)
    order, face_of = [start], []
    while True:
        nxt, f = succ[order[-1]]
        face_of.append(f)
        if nxt == start:
            break
        order.append(nxt)
        if len(order) > len(faces):
            raise DegenerateGeometryError("inconsistent incidence at vertex")
    if len(order) != len(P.neighbors(v)):
        raise DegenerateGeometryError("inconsistent incidence at vertex")
    dirs = P.vertices[order] - P.vertices[v]
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    inner = -P.face_normals[faces].sum(axis=0)
    if np.sum(np.cross(dirs, np.roll(dirs, -1, axis=0)) @ inner) < 0:
        order = order[::-1]
        # polygon edge i joins order[i], order[i+1]; reversal shifts face labels
        face_of = [face_of[(len(order) - 2 - i) % len(order)] for i in range(len(order))]
        dirs = dirs[::-1]
    return SphericalPolygon.from_points(
        dirs, P.tol, source_vertex=v,
        edge_ids=tuple(P.edge_id(v, u) for u in order), face_ids=tuple(face_of))


# ---------------------------------------------------------------------------
# spherical squared-distance critical points

@dataclass(frozen=True)
class SphCritical:
    kind: str  # "max-at-vertex", "min-on-edge" or "max-on-edge"
    location: np.ndarray
    feature: tuple[str, int]
    distance: float
    short: bool

    @property
    def is_max(self) -> bool:
        return self.kind.startswith("max")


def _check_query(Q: SphericalPolygon, Y: np.ndarray, tol: Tolerance) -> np.ndarray:
    Y = np.asarray(Y, dtype=float)
    Y = Y / np.linalg.norm(Y)
    m = Q.interior_margin(Y)
    if m <= -tol.eps_ang:
        raise PointOutsideError("query direction outside the polygon")
    if m < tol.eps_ang:
        raise PointOutsideError("query direction on the polygon boundary")
    if np.min(Q.vertices @ Y) <= -1 + tol.eps_ang:
        raise DegenerateGeometryError("query antipodal to a vertex")
    return Y


def sph_critical_points(Q: SphericalPolygon, Y, tol: Tolerance = Tolerance()) -> list[SphCritical]:
    """Critical points of the distance to ``Y`` along the boundary, in boundary order."""
    Y = _check_query(Q, Y, tol)
    eps = tol.eps_ang
    V, k = Q.vertices, Q.n
    t_next, t_prev = Q.tangents()
    cos_short = np.sin(eps)
    out: list[SphCritical] = []
    for i in range(k):
        a, b = float(t_next[i] @ Y), float(t_prev[i] @ Y)
        if min(a, b) > eps:
            c = float(V[i] @ Y)
            out.append(SphCritical("max-at-vertex", V[i], ("vertex", i),
                                   sph_distance(V[i], Y), c > cos_short))
        elif min(a, b) > -eps:
            raise OnSheetError(f"query on a spherical sheet at vertex {i}")
        p = Q.poles[i]
        F = Y - (Y @ p) * p
        F /= np.linalg.norm(F)
        found = []
        for X, kind in ((F, "min-on-edge"), (-F, "max-on-edge")):
            m = Q.on_edge_arc(i, X, eps)
            if m > eps:
                found.append((sph_distance(V[i], X), X, kind))
            elif m > -eps:
                raise OnSheetError(f"critical point at an endpoint of edge {i}")
        for _, X, kind in sorted(found, key=lambda r: r[0]):
            out.append(SphCritical(kind, X, ("edge", i), sph_distance(X, Y),
                                   float(X @ Y) > cos_short))
    return out


def short_maxima(Q: SphericalPolygon, Y, tol: Tolerance = Tolerance()) -> list[int]:
    return [c.feature[1] for c in sph_critical_points(Q, Y, tol) if c.kind == "max-at-vertex" and c.short]


def count_short_maxima(Q: SphericalPolygon, Ys: np.ndarray, eps: float) -> np.ndarray:
    """Vectorised short-maximum counts for an (M, 3) batch of directions; -1 outside Q."""
    t_next, t_prev = Q.tangents()
    ok = (Ys @ Q.vertices.T > eps) & (Ys @ t_next.T > eps) & (Ys @ t_prev.T > eps)
    counts = ok.sum(axis=1)
    counts[np.min(Ys @ Q.poles.T, axis=1) <= eps] = -1
    return counts


def core_contains(Q: SphericalPolygon, Y, tol: Tolerance = Tolerance()) -> bool:
    """True iff every boundary point is within pi/2 - tol of ``Y``."""
    Y = _check_query(Q, Y, tol)
    cutoff = np.sin(tol.eps_ang)  # cos(pi/2 - eps)
    if np.min(Q.vertices @ Y) < cutoff:
        return False
    for i in range(Q.n):
        p = Q.poles[i]
        far = -(Y - (Y @ p) * p)
        far /= np.linalg.norm(far)
        if Q.on_edge_arc(i, far, 0.0) > 0 and far @ Y < cutoff:
            return False
    return True


# ---------------------------------------------------------------------------
# nice / skew

def short_max_region_constraints(Q: SphericalPolygon, i: int) -> list[np.ndarray]:
    """Hemisphere poles whose open intersection (with Int Q) is the short-max region of vertex i."""
    t_next, t_prev = Q.tangents()
    return [Q.vertices[i], t_next[i], t_prev[i]]


def triangle_criterion(Q: SphericalPolygon, tol: Tolerance = Tolerance()) -> tuple[int, int, int] | None:
    """Labelling ``(A, B, C)`` of a triangle satisfying the skew-triangle conditions, if any.

    Conditions: |CA| > pi/2, |BC| < pi/2, angle ABC > pi/2, angles BAC and
    BCA < pi/2, |BA| > pi/2, and |AZ| > pi/2 where Z on AC has ZB orthogonal
    to BC.
    """
    if Q.n != 3:
        return None
    eps = tol.eps_ang
    V = Q.vertices
    for ia, ib, ic in itertools.permutations(range(3)):
        A, B, C = V[ia], V[ib], V[ic]
        if not (C @ A < -eps and B @ C > eps and B @ A < -eps):
            continue
        if not (tangent(B, A) @ tangent(B, C) < -eps and tangent(A, B) @ tangent(A, C) > eps
                and tangent(C, B) @ tangent(C, A) > eps):
            continue
        Z = _z_point(A, B, C)
        if Z is not None and A @ Z < -eps:
            return ia, ib, ic
    return None


def _z_point(A, B, C) -> np.ndarray | None:
    """Point Z on arc AC whose geodesic to B is orthogonal to BC."""
    pole_ac = np.cross(A, C)
    pole_ac /= np.linalg.norm(pole_ac)
    Z = np.cross(tangent(B, C), pole_ac)
    nz = np.linalg.norm(Z)
    if nz == 0:
        return None
    Z /= nz
    for cand in (Z, -Z):
        if np.cross(A, cand) @ pole_ac > 0 and np.cross(cand, C) @ pole_ac > 0:
            return cand
    return None


@dataclass(frozen=True)
class SkewBudget:
    """``mode`` is "exact" (region intersection) or "sampling" (chart grid)."""

    mode: str = "exact"
    grid: int = 64
    levels: int = 3


@dataclass
class SkewReport:
    verdict: str  # "nice" or "skew"
    certificate: np.ndarray | None
    acute_vertices: list[int]
    method: str  # "acute-count", "triangle-criterion", "region-exact" or "sampling"
    short_maxima: list[int] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def is_nice(self) -> bool:
        return self.verdict == "nice"


def short_max_regions(Q: SphericalPolygon, chart: Chart, eps: float) -> list[np.ndarray]:
    """Chart polygon of each vertex's short-maximum region (possibly empty)."""
    base = chart.to_chart(Q.vertices)
    for p in Q.poles:
        base = clip_polygon(base, *chart.halfplane(p, eps))
    out = []
    for i in range(Q.n):
        poly = base
        for n in short_max_region_constraints(Q, i):
            poly = clip_polygon(poly, *chart.halfplane(n, eps))
        out.append(poly)
    return out


def _exact_certificate(Q: SphericalPolygon, tol: Tolerance):
    chart = Q.chart()
    eps = tol.eps_ang
    regions = short_max_regions(Q, chart, eps)
    live = [i for i, r in enumerate(regions) if polygon_area_2d(r) > eps * eps]
    cons = {i: short_max_region_constraints(Q, i) for i in live}
    best = None
    for i, j, k in itertools.combinations(live, 3):
        poly = regions[i]
        for n in cons[j] + cons[k]:
            poly = clip_polygon(poly, *chart.halfplane(n, eps))
        area = polygon_area_2d(poly)
        if area <= eps * eps:
            continue
        Y = chart.from_chart(poly.mean(axis=0))[0]
        try:
            sm = short_maxima(Q, Y, tol)
        except (OnSheetError, PointOutsideError):
            continue
        if len(sm) >= 3 and (best is None or area > best[0]):
            best = (area, Y, sm)
    return (best[1], best[2]) if best else None


def _sampling_certificate(Q: SphericalPolygon, tol: Tolerance, budget: SkewBudget):
    chart = Q.chart()
    eps = tol.eps_ang
    xy = chart.to_chart(Q.vertices)
    lo, hi = xy.min(axis=0), xy.max(axis=0)
    centers = [0.5 * (lo + hi)]
    half = 0.5 * (hi - lo)
    for _ in range(budget.levels + 1):
        cand = []
        for c in centers:
            gx = np.linspace(c[0] - half[0], c[0] + half[0], budget.grid)
            gy = np.linspace(c[1] - half[1], c[1] + half[1], budget.grid)
            pts = np.array(np.meshgrid(gx, gy)).reshape(2, -1).T
            Ys = chart.from_chart(pts)
            counts = count_short_maxima(Q, Ys, eps)
            for idx in np.flatnonzero(counts >= 3):
                sm = short_maxima(Q, Ys[idx], tol)
                if len(sm) >= 3:
                    return Ys[idx], sm
            top = counts.max()
            if top >= 0:
                cand.extend(pts[counts == top][:4])
        # refine around the best points found at this level
        half = half * 4.0 / budget.grid
        centers = cand[:8]
        if not centers:
            break
    return None


def classify_skew(Q: SphericalPolygon, tol: Tolerance = Tolerance(),
                  budget: SkewBudget = SkewBudget()) -> SkewReport:
    acute = Q.acute_vertices(tol)
    warnings: list[str] = []
    labels = triangle_criterion(Q, tol)
    if budget.mode == "sampling":
        found = _sampling_certificate(Q, tol, budget)
        search_method = "sampling"
    elif budget.mode == "exact":
        found = _exact_certificate(Q, tol)
        search_method = "region-exact"
    else:
        raise ValueError(f"unknown skew budget mode {budget.mode!r}")

    if found is not None:
        Y, sm = found
        if labels is not None:
            raise NumericalAnomaly("skew-triangle criterion holds but a certificate exists")
        method = "acute-count" if len(acute) != 2 else search_method
        return SkewReport("nice", Y, acute, method, sm, warnings)
    if len(acute) != 2:
        warnings.append(f"skew verdict with {len(acute)} acute angles")
    if labels is not None:
        return SkewReport("skew", None, acute, "triangle-criterion", [], warnings)
    if Q.n == 3:
        warnings.append("triangle is skew but fails the skew-triangle criterion")
    return SkewReport("skew", None, acute, search_method, [], warnings)


# ---------------------------------------------------------------------------
# minimal bigon

@dataclass(frozen=True)
class Bigon:
    """Lune ``{x : a.x >= 0, b.x >= 0}`` of minimal angle containing a polygon."""

    pole: np.ndarray
    width: float
    normals: tuple[np.ndarray, np.ndarray]
    R: np.ndarray  # midpoint of the lune edge on {a.x = 0}
    T: np.ndarray  # midpoint of the lune edge on {b.x = 0}
    X: np.ndarray  # midpoint of RT
    kind: str  # "edge-edge" or "edge-vertex" contact

    @property
    def is_acute(self) -> bool:
        return self.width < HALF_PI


def _edge_midpoint(N, a, other):
    m = np.cross(N, a)
    m /= np.linalg.norm(m)
    return m if m @ other >= 0 else -m


def minimal_bigon(Q: SphericalPolygon, tol: Tolerance = Tolerance()) -> Bigon:
    """Minimal-angle lune containing ``Q``.

    The pair of supporting hemisphere poles with the largest angle between
    them lies in the polar polygon (vertices = edge poles of ``Q``); at an
    optimum at least one pole is an edge pole, the other is an edge pole or
    the farthest point of one polar edge.
    """
    P, V, k = Q.poles, Q.vertices, Q.n
    best = None

    def consider(cos_ab, a, b, kind):
        nonlocal best
        if best is None or cos_ab < best[0] - 1e-15:
            best = (cos_ab, a, b, kind)

    for i, j in itertools.combinations(range(k), 2):
        consider(float(P[i] @ P[j]), P[i], P[j], "edge-edge")
    for i in range(k):
        a = P[i]
        for m in range(k):
            if m in (i, (i + 1) % k):
                continue
            vm = V[m]
            proj = a - (a @ vm) * vm
            if np.linalg.norm(proj) < tol.eps_ang:
                continue
            b = -proj / np.linalg.norm(proj)
            # b must lie on the polar arc between the poles of the edges at vertex m
            coef, *_ = np.linalg.lstsq(np.column_stack([P[m - 1], P[m]]), b, rcond=None)
            if np.all(coef > tol.eps_ang):
                consider(float(a @ b), a, b, "edge-vertex")
    cos_ab, a, b, kind = best
    N = np.cross(a, b)
    if np.linalg.norm(N) < tol.eps_ang:
        raise DegenerateGeometryError("degenerate lune")
    N /= np.linalg.norm(N)
    if N @ Q.witness < 0:
        N = -N
    R = _edge_midpoint(N, a, b)
    T = _edge_midpoint(N, b, a)
    X = R + T
    X /= np.linalg.norm(X)
    width = float(np.pi - np.arccos(np.clip(cos_ab, -1, 1)))
    slack = 1e3 * tol.eps_ang
    if min(np.min(P @ R), np.min(P @ T)) < -slack or np.min(V @ a) < -slack or np.min(V @ b) < -slack:
        raise NumericalAnomaly("minimal lune fails the edge-midpoint verification")
    return Bigon(N, width, (a, b), R, T, X, kind)
