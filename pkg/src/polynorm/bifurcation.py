"""Sheets of the bifurcation set and crossing events along segments.

A blue sheet belongs to an (edge, incident face) pair: it is the side of the
face's prism standing on the edge. A red sheet belongs to an (edge, endpoint)
pair: it is the end cap of the edge's wedge, which coincides with a facet of
the endpoint's inner normal cone. Blue sheets of acute edges only touch the
polytope along the edge itself; they are emitted with an empty region.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalAnomaly, OnSheetError, RerouteError
from .geom import Plane, Tolerance, clip_polygon, orthonormal_basis, polygon_area_2d
from .normals import NormalCount, count_normals
from .polytope import Polytope

BLUE = "blue"
RED = "red"


@dataclass(frozen=True)
class Sheet:
    """One planar piece of the bifurcation set.

    ``constraints`` holds the two half-spaces ``normal . x <= offset`` that,
    together with the polytope, cut the region out of the carrier plane.
    """

    color: str
    carrier: Plane
    region: np.ndarray  # (k, 3) polygon, possibly empty
    owner: tuple[tuple[str, int], tuple[str, int]]
    constraint_normals: np.ndarray = field(repr=False)
    constraint_offsets: np.ndarray = field(repr=False)

    @property
    def is_empty(self) -> bool:
        return len(self.region) < 3

    def area(self) -> float:
        if self.is_empty:
            return 0.0
        u, w = orthonormal_basis(self.carrier.unit_normal)
        return abs(polygon_area_2d(np.c_[self.region @ u, self.region @ w]))


def _region(P: Polytope, carrier: Plane, cn: np.ndarray, co: np.ndarray, eps: float) -> np.ndarray:
    u, w = orthonormal_basis(carrier.unit_normal)
    c = carrier.offset * carrier.unit_normal
    r = 2.0 * P.diameter
    poly = np.array([c + r * (su * u + sw * w) for su, sw in ((-1, -1), (1, -1), (1, 1), (-1, 1))])
    for n, o in zip(P.face_normals, P.face_offsets):
        poly = clip_polygon(poly, n, o)
    for n, o in zip(cn, co):
        poly = clip_polygon(poly, n, o)
    if len(poly) < 3:
        return poly[:0]
    area = abs(polygon_area_2d(np.c_[poly @ u, poly @ w]))
    return poly if area > eps * P.diameter else poly[:0]


def build_sheets(P: Polytope, tol: Tolerance | None = None) -> list[Sheet]:
    """All blue and red sheets, blue first, ordered by edge then side."""
    tol = tol or P.tol
    a, b = P.edge_endpoints
    d = P.edge_directions
    t = P.in_face_directions
    blue, red = [], []
    for e, edge in enumerate(P.edges):
        slab_n = np.array([-d[e], d[e]])
        slab_o = np.array([-d[e] @ a[e], d[e] @ b[e]])
        for s, f in enumerate(edge.faces):
            carrier = Plane(t[e, s], float(t[e, s] @ a[e]))
            blue.append(Sheet(BLUE, carrier, _region(P, carrier, slab_n, slab_o, tol.eps_len),
                              (("edge", e), ("face", f)), slab_n, slab_o))
        for v, p in zip(edge.vertices, (a[e], b[e])):
            carrier = Plane(d[e], float(d[e] @ p))
            cn = -t[e]
            co = cn @ p
            red.append(Sheet(RED, carrier, _region(P, carrier, cn, co, tol.eps_len),
                             (("edge", e), ("vertex", v)), cn, co))
    return blue + red


@dataclass(frozen=True)
class CrossingEvent:
    t: float
    sheet: int  # index into the sheet list
    color: str
    kind: str  # "birth" | "death"
    pair: str  # "min+saddle" | "max+saddle"
    count_before: NormalCount
    count_after: NormalCount


@dataclass(frozen=True)
class SegmentTrace:
    """Crossings along ``a + t (b - a)`` and the constant count on each cell."""

    start: np.ndarray
    end: np.ndarray
    events: list[CrossingEvent]
    cells: list[tuple[float, float, NormalCount]]

    def point(self, t: float) -> np.ndarray:
        return self.start + t * (self.end - self.start)

    def best_cell(self) -> tuple[float, float, NormalCount]:
        # earliest cell wins ties
        return max(self.cells, key=lambda c: (c[2].total, -c[0]))


class _SheetArrays:
    def __init__(self, sheets: list[Sheet]):
        self.normals = np.array([s.carrier.unit_normal for s in sheets])
        self.offsets = np.array([s.carrier.offset for s in sheets])
        self.cn = np.array([s.constraint_normals for s in sheets])
        self.co = np.array([s.constraint_offsets for s in sheets])
        self.color = np.array([s.color for s in sheets])


def _crossing_params(arr: _SheetArrays, a, b, tol: Tolerance, min_gap: float) -> list[tuple[float, int]]:
    u = b - a
    length = float(np.linalg.norm(u))
    da = arr.normals @ a - arr.offsets
    db = arr.normals @ b - arr.offsets
    slope = db - da
    hits = []
    flat = np.abs(slope) <= tol.eps_ang * length
    with np.errstate(divide="ignore", invalid="ignore"):
        tt = np.where(flat, np.nan, -da / slope)
    candidates = np.flatnonzero(~flat & (tt >= 0) & (tt <= 1))
    for i in np.flatnonzero(flat & (np.abs(da) < tol.eps_len)):
        x = a + 0.5 * u
        if np.all(arr.cn[i] @ x - arr.co[i] < tol.eps_len):
            raise RerouteError(f"segment runs inside sheet {i} (tangential crossing)")
    for i in candidates:
        x = a + tt[i] * u
        slack = float(np.max(arr.cn[i] @ x - arr.co[i]))
        if slack <= -tol.eps_len:
            hits.append((float(tt[i]), int(i)))
        elif slack < tol.eps_len:
            raise RerouteError(f"segment crosses sheet {i} at its boundary")
    hits.sort()
    for (t0, _), (t1, _) in zip(hits, hits[1:]):
        if (t1 - t0) * length < min_gap:
            raise RerouteError("coincident sheet crossings")
    for tc, _ in hits[:1] + hits[-1:]:
        if min(tc, 1 - tc) * length < min_gap:
            raise RerouteError("sheet crossing too close to a segment endpoint")
    return hits


def _sheet_arrays(P: Polytope, sheets: list[Sheet]) -> _SheetArrays:
    cache = P.__dict__.setdefault("_sheet_arrays", {})
    key = id(sheets)
    if key not in cache or cache[key][0] is not sheets:
        cache.clear()
        cache[key] = (sheets, _SheetArrays(sheets))
    return cache[key][1]


def trace_segment(P: Polytope, sheets: list[Sheet], a, b, tol: Tolerance | None = None,
                  min_gap: float | None = None) -> SegmentTrace:
    """Crossings of the segment ``ab`` with the sheets, classified by recount.

    Parameters
    ----------
    min_gap : float, optional
        Smallest admissible distance between consecutive crossings; defaults
        to ``1e3 * eps_len``. Closer crossings raise ``RerouteError``.
    """
    tol = tol or P.tol
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    gap = 1e3 * tol.eps_len if min_gap is None else min_gap
    arr = _sheet_arrays(P, sheets)
    hits = _crossing_params(arr, a, b, tol, gap)
    ts = [0.0] + [h[0] for h in hits] + [1.0]
    start_count = count_normals(P, a, tol)
    end_count = count_normals(P, b, tol)
    cells = []
    for lo, hi in zip(ts, ts[1:]):
        try:
            c = count_normals(P, a + 0.5 * (lo + hi) * (b - a), tol)
        except OnSheetError as exc:
            raise RerouteError(f"recount probe on a sheet: {exc}") from exc
        cells.append((lo, hi, c))
    if cells[0][2] != start_count or cells[-1][2] != end_count:
        raise NumericalAnomaly("endpoint recount disagrees with the adjacent cell")
    events = []
    for k, (tc, i) in enumerate(hits):
        before, after = cells[k][2], cells[k + 1][2]
        dmin, dsad, dmax = after - before
        color = str(arr.color[i])
        if color == BLUE:
            ok = dmax == 0 and dmin == dsad and abs(dmin) == 1
            pair = "min+saddle"
        else:
            ok = dmin == 0 and dmax == dsad and abs(dmax) == 1
            pair = "max+saddle"
        if not ok:
            raise NumericalAnomaly(
                f"{color} crossing of sheet {i} at t={tc:.6g} changed counts by {(dmin, dsad, dmax)}")
        events.append(CrossingEvent(tc, i, color, "birth" if dsad > 0 else "death", pair, before, after))
    return SegmentTrace(a, b, events, cells)


def segment_crossings(P: Polytope, sheets: list[Sheet], a, b, tol: Tolerance | None = None) -> list[CrossingEvent]:
    return trace_segment(P, sheets, a, b, tol).events
