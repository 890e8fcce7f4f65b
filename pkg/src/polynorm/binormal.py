"""Width function and binormals.

A binormal is a chord ``VW`` such that the two planes through ``V`` and ``W``
orthogonal to it both support the polytope. Candidates are enumerated over
the face lattice by endpoint type and kept when the support test holds.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .geom import Tolerance
from .polytope import Polytope

VV, VF, EE, VE = "vertex-vertex", "vertex-face", "edge-edge", "vertex-edge"
KINDS = (VV, VF, EE, VE)


@dataclass(frozen=True)
class WidthSample:
    direction: np.ndarray
    width: float


def width(P: Polytope, u) -> WidthSample:
    u = np.asarray(u, dtype=float)
    if abs(np.linalg.norm(u) - 1.0) > 1e-9:
        raise ValueError("direction must be a unit vector")
    s = P.vertices @ u
    return WidthSample(u, float(s.max() - s.min()))


def widths(P: Polytope, dirs: np.ndarray) -> np.ndarray:
    """Vectorised width over an ``(n, 3)`` array of unit directions."""
    s = P.vertices @ np.asarray(dirs, dtype=float).T
    return s.max(axis=0) - s.min(axis=0)


@dataclass(frozen=True)
class Binormal:
    """Chord from ``start`` to ``end``; each endpoint is ``((kind, id), point)``.

    For vertex-edge binormals the vertex comes first.
    """

    kind: str
    start: tuple[tuple[str, int], np.ndarray]
    end: tuple[tuple[str, int], np.ndarray]
    direction: np.ndarray
    length: float

    @property
    def endpoints(self):
        return self.start, self.end


class BinormalList(list):
    """List of binormals with the number of borderline candidates dropped."""

    def __init__(self, items=(), dropped: int = 0):
        super().__init__(items)
        self.dropped = dropped

    def of_kind(self, kind: str) -> list[Binormal]:
        return [b for b in self if b.kind == kind]

    def kind_counts(self) -> dict[str, int]:
        return {k: len(self.of_kind(k)) for k in KINDS}

    def euler_sum(self) -> int:
        """``#VV - #VE + #VF + #EE``; equals 1 on generic polytopes (Euler characteristic of RP^2)."""
        c = self.kind_counts()
        return c[VV] - c[VE] + c[VF] + c[EE]


def _support(values: np.ndarray, lo_set, hi_set, eps: float) -> str:
    """``"ok"``, ``"fail"`` or ``"borderline"`` for a candidate's support planes."""
    lo = values[list(lo_set)]
    hi = values[list(hi_set)]
    lo_v, hi_v = float(lo.mean()), float(hi.mean())
    if np.ptp(lo) > eps or np.ptp(hi) > eps:
        return "fail"
    if values.min() < lo_v - eps or values.max() > hi_v + eps:
        return "fail"
    rest = np.ones(len(values), bool)
    rest[list(lo_set) + list(hi_set)] = False
    r = values[rest]
    if len(r) and (r.min() < lo_v + eps or r.max() > hi_v - eps):
        return "borderline"
    return "ok"


def enumerate_binormals(P: Polytope, tol: Tolerance | None = None) -> BinormalList:
    """All binormals of ``P`` of the four generic endpoint types."""
    tol = tol or P.tol
    eps = tol.eps_len
    V = P.vertices
    out: list[Binormal] = []
    dropped = 0

    def keep(kind, lo_set, hi_set, p, q, f0, f1):
        nonlocal dropped
        chord = q - p
        length = float(np.linalg.norm(chord))
        if length < eps:
            return
        u = chord / length
        verdict = _support(V @ u, lo_set, hi_set, eps)
        if verdict == "borderline":
            dropped += 1
        elif verdict == "ok":
            out.append(Binormal(kind, (f0, p), (f1, q), u, length))

    for i, j in itertools.combinations(range(P.n_vertices), 2):
        keep(VV, [i], [j], V[i], V[j], ("vertex", i), ("vertex", j))

    for f, face in enumerate(P.faces):
        n, off = P.face_normals[f], P.face_offsets[f]
        edges = P.face_edges[f]
        t = P.in_face_directions
        a, _ = P.edge_endpoints
        for v in range(P.n_vertices):
            if v in face.vertices:
                continue
            foot = V[v] + (off - n @ V[v]) * n
            margin = min(t[e, P.edges[e].faces.index(f)] @ (foot - a[e]) for e in edges)
            if margin <= -eps:
                continue
            if margin < eps:
                dropped += 1
                continue
            keep(VF, [v], list(face.vertices), V[v], foot, ("vertex", v), ("face", f))

    a, b = P.edge_endpoints
    d = P.edge_directions
    L = P.edge_lengths
    for e1, e2 in itertools.combinations(range(P.n_edges), 2):
        if set(P.edges[e1].vertices) & set(P.edges[e2].vertices):
            continue
        c = np.cross(d[e1], d[e2])
        if np.linalg.norm(c) < tol.eps_ang:
            continue
        # feet a1 + s d1, a2 + r d2 with the connecting chord orthogonal to both
        m = np.array([[1.0, -(d[e1] @ d[e2])], [d[e1] @ d[e2], -1.0]])
        rhs = np.array([(a[e2] - a[e1]) @ d[e1], (a[e2] - a[e1]) @ d[e2]])
        s, r = np.linalg.solve(m, rhs)
        lo = min(s, L[e1] - s, r, L[e2] - r)
        if lo <= -eps:
            continue
        if lo < eps:
            dropped += 1
            continue
        p, q = a[e1] + s * d[e1], a[e2] + r * d[e2]
        keep(EE, list(P.edges[e1].vertices), list(P.edges[e2].vertices), p, q,
             ("edge", e1), ("edge", e2))

    for v in range(P.n_vertices):
        for e, edge in enumerate(P.edges):
            if v in edge.vertices:
                continue
            s = float((V[v] - a[e]) @ d[e])
            lo = min(s, L[e] - s)
            if lo <= -eps:
                continue
            if lo < eps:
                dropped += 1
                continue
            keep(VE, [v], list(edge.vertices), V[v], a[e] + s * d[e], ("vertex", v), ("edge", e))

    return BinormalList(out, dropped)
