"""Normals from an interior point, i.e. critical points of the squared distance.

Each feature's active region is described by signed distances ("margins")
to the planes of its bifurcation sheets:

* face F: the in-face margins ``t_{e,F} . (y - a_e)`` of all edges of F,
* edge e: its two in-face margins plus the two endpoint margins along e,
* vertex v: ``d_{v->u} . (y - v)`` over all edges ``vu``.

A feature carries a normal iff the smallest of its margins is positive. A
smallest margin within ``eps_len`` of zero means ``y`` is on a sheet.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import NumericalAnomaly, OnSheetError, PointOutsideError
from .geom import Location, Tolerance, classify_margin, foot_on_segment
from .polytope import AcuteCircuit, Polytope, circuit_vertices


class MorseType(str, Enum):
    MIN = "min"
    SADDLE = "saddle"
    MAX = "max"


class FeatureKind(str, Enum):
    FACE = "face"
    EDGE = "edge"
    VERTEX = "vertex"


MORSE_OF = {FeatureKind.FACE: MorseType.MIN, FeatureKind.EDGE: MorseType.SADDLE,
            FeatureKind.VERTEX: MorseType.MAX}


@dataclass(frozen=True)
class NormalRecord:
    morse_type: MorseType
    feature: tuple[FeatureKind, int]
    base: np.ndarray
    squared_distance: float


@dataclass(frozen=True)
class NormalCount:
    n_min: int
    n_saddle: int
    n_max: int

    @property
    def total(self) -> int:
        return self.n_min + self.n_saddle + self.n_max

    def satisfies_parity(self) -> bool:
        return self.total == 2 + 2 * self.n_saddle

    def as_dict(self) -> dict:
        return {"n_min": self.n_min, "n_saddle": self.n_saddle, "n_max": self.n_max,
                "total": self.total}

    def __sub__(self, other: "NormalCount") -> tuple[int, int, int]:
        return (self.n_min - other.n_min, self.n_saddle - other.n_saddle, self.n_max - other.n_max)


class _Frames:
    """Per-polytope arrays for vectorised margin evaluation."""

    def __init__(self, P: Polytope):
        a, b = P.edge_endpoints
        self.a, self.b = a, b
        self.d = P.edge_directions
        self.t = P.in_face_directions  # (E, 2, 3)
        self.t_anchor_dot = np.einsum("esk,ek->es", self.t, a)
        pairs = [(e, s, f) for e, edge in enumerate(P.edges) for s, f in enumerate(edge.faces)]
        self.fe_edge = np.array([p[0] for p in pairs])
        self.fe_side = np.array([p[1] for p in pairs])
        self.fe_face = np.array([p[2] for p in pairs])
        vv = [(v, e, 1.0 if P.edges[e].vertices[0] == v else -1.0)
              for v in range(P.n_vertices) for e in P.vertex_edges[v]]
        self.ve_vertex = np.array([x[0] for x in vv])
        self.ve_edge = np.array([x[1] for x in vv])
        self.ve_sign = np.array([x[2] for x in vv])
        self.n_faces, self.n_edges, self.n_vertices = P.n_faces, P.n_edges, P.n_vertices


def _frames(P: Polytope) -> _Frames:
    fr = P.__dict__.get("_normal_frames")
    if fr is None:
        fr = _Frames(P)
        P.__dict__["_normal_frames"] = fr
    return fr


def active_margins(P: Polytope, y) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Smallest sheet margin of every face, edge and vertex at ``y``."""
    fr = _frames(P)
    y = np.asarray(y, dtype=float)
    m_in = np.einsum("esk,k->es", fr.t, y) - fr.t_anchor_dot  # (E, 2)
    face = np.full(fr.n_faces, np.inf)
    np.minimum.at(face, fr.fe_face, m_in[fr.fe_edge, fr.fe_side])
    s_a = np.einsum("ek,ek->e", fr.d, y - fr.a)
    s_b = np.einsum("ek,ek->e", fr.d, fr.b - y)
    edge = np.minimum(np.minimum(m_in[:, 0], m_in[:, 1]), np.minimum(s_a, s_b))
    # vertex v = edge start (sign +1) uses s_a, edge end (sign -1) uses s_b
    vm = np.where(fr.ve_sign > 0, s_a[fr.ve_edge], s_b[fr.ve_edge])
    vertex = np.full(fr.n_vertices, np.inf)
    np.minimum.at(vertex, fr.ve_vertex, vm)
    return face, edge, vertex


def check_interior(P: Polytope, y, tol: Tolerance | None = None) -> None:
    tol = tol or P.tol
    d = P.face_signed_distances(y)
    worst = float(d.max())
    if worst > tol.eps_len:
        raise PointOutsideError(f"point outside the polytope (distance {worst:.3g})")
    if worst > -tol.eps_len:
        raise PointOutsideError("point on the polytope boundary")


def sheet_clearance(P: Polytope, y) -> float:
    """Smallest |margin| over all features: a proxy for the distance to B(P)."""
    f, e, v = active_margins(P, y)
    return float(min(np.abs(f).min(), np.abs(e).min(), np.abs(v).min()))


def active_region_contains(P: Polytope, feature: tuple, y, tol: Tolerance | None = None) -> Location:
    """Whether ``y`` is in the active region of ``feature``.

    Returns ``Location.BOUNDARY`` when ``y`` is on one of the feature's sheets.
    """
    tol = tol or P.tol
    check_interior(P, y, tol)
    kind, idx = FeatureKind(feature[0]), int(feature[1])
    f, e, v = active_margins(P, y)
    margin = {FeatureKind.FACE: f, FeatureKind.EDGE: e, FeatureKind.VERTEX: v}[kind][idx]
    return classify_margin(float(margin), tol.eps_len)


def normals_from(P: Polytope, y, tol: Tolerance | None = None) -> tuple[list[NormalRecord], NormalCount]:
    """All normals to the boundary emanating from the interior point ``y``."""
    tol = tol or P.tol
    y = np.asarray(y, dtype=float)
    check_interior(P, y, tol)
    f, e, v = active_margins(P, y)
    eps = tol.eps_len
    for name, m in (("face", f), ("edge", e), ("vertex", v)):
        close = np.flatnonzero(np.abs(m) < eps)
        if len(close):
            raise OnSheetError(f"point on a sheet of {name} {int(close[0])}")
    fr = _frames(P)
    records: list[NormalRecord] = []
    for i in np.flatnonzero(f > 0):
        n = P.face_normals[i]
        base = y - (n @ y - P.face_offsets[i]) * n
        records.append(NormalRecord(MorseType.MIN, (FeatureKind.FACE, int(i)), base,
                                    float((base - y) @ (base - y))))
    for i in np.flatnonzero(e > 0):
        base = fr.a[i] + ((y - fr.a[i]) @ fr.d[i]) * fr.d[i]
        records.append(NormalRecord(MorseType.SADDLE, (FeatureKind.EDGE, int(i)), base,
                                    float((base - y) @ (base - y))))
    for i in np.flatnonzero(v > 0):
        base = P.vertices[i]
        records.append(NormalRecord(MorseType.MAX, (FeatureKind.VERTEX, int(i)), np.array(base),
                                    float((base - y) @ (base - y))))
    count = NormalCount(int((f > 0).sum()), int((e > 0).sum()), int((v > 0).sum()))
    if not count.satisfies_parity() or count.n_max == 0:
        raise NumericalAnomaly(f"normal count {count} violates 2 + 2s")
    return records, count


def count_normals(P: Polytope, y, tol: Tolerance | None = None) -> NormalCount:
    return normals_from(P, y, tol)[1]


@dataclass(frozen=True)
class CircuitExtrema:
    minima: list[tuple[int, np.ndarray]]  # (edge id, foot)
    maxima: list[int]  # vertex ids
    vertex_minima: list[int]  # local minima at circuit vertices (not expected on skew circuits)
    per_component: list[tuple[int, int]]  # (#minima incl. vertex minima, #maxima)


def circuit_extrema(P: Polytope, circuit: AcuteCircuit, y, tol: Tolerance | None = None) -> CircuitExtrema:
    """Extrema of the squared distance from ``y`` restricted to the acute circuit."""
    tol = tol or P.tol
    y = np.asarray(y, dtype=float)
    check_interior(P, y, tol)
    if not circuit.components:
        raise ValueError("circuit has no closed component")
    minima, maxima, vmin, per = [], [], [], []
    for cycle in circuit.components:
        if any(not 0 <= e < P.n_edges for e in cycle):
            raise ValueError("circuit edge not in polytope")
        verts = circuit_vertices(P, cycle)
        n_lo = n_hi = 0
        for e in cycle:
            u, w = P.edges[e].vertices
            foot = foot_on_segment(y, P.vertices[u], P.vertices[w], tol)
            if foot is not None:
                minima.append((e, foot))
                n_lo += 1
        k = len(cycle)
        for j, v in enumerate(verts):
            # vertex j joins cycle[j-1] and cycle[j]
            nb = [next(x for x in P.edges[cycle[j - 1]].vertices if x != v),
                  next(x for x in P.edges[cycle[j % k]].vertices if x != v)]
            s = [float((y - P.vertices[v]) @ (P.vertices[u] - P.vertices[v])) for u in nb]
            if min(s) > 0:
                maxima.append(v)
                n_hi += 1
            elif max(s) < 0:
                vmin.append(v)
                n_lo += 1
        per.append((n_lo, n_hi))
    return CircuitExtrema(minima, maxima, vmin, per)
