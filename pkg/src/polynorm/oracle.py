"""Brute-force verifiers used by the tests and the acceptance suite.

Nothing here calls the engine's predicates. Counts come from a piecewise
linear boundary mesh, spherical verdicts from dense boundary sampling, the
minimal lune from a pole grid, width extrema from direction sampling and
hull facets from enumerating point triples.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.spatial import ConvexHull, Delaunay

from .polytope import Polytope


# ---------------------------------------------------------------------------
# boundary mesh

@dataclass(frozen=True)
class BoundaryMesh:
    """Triangulation of the polytope boundary.

    ``feature[i]`` is ``(kind, id)`` for mesh vertex ``i``: polytope vertex,
    interior of an edge or interior of a face.
    """

    points: np.ndarray
    triangles: np.ndarray
    feature: list[tuple[str, int]]
    max_edge_length: float

    @property
    def area(self) -> float:
        p = self.points[self.triangles]
        return 0.5 * float(np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1).sum())


def _plane_frame(n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    helper = np.array([1.0, 0, 0]) if abs(n[0]) < 0.9 else np.array([0, 1.0, 0])
    u = np.cross(n, helper)
    u /= np.linalg.norm(u)
    return u, np.cross(n, u)


def build_mesh(P: Polytope, h: float) -> BoundaryMesh:
    """Mesh with spacing about ``h``; edge subdivisions are shared between faces."""
    chunks = [P.vertices]
    feature = [("vertex", i) for i in range(P.n_vertices)]
    n_pts = P.n_vertices
    edge_pts: dict[tuple[int, int], list[int]] = {}
    for e, edge in enumerate(P.edges):
        i, j = edge.vertices
        a, b = P.vertices[i], P.vertices[j]
        k = max(1, math.ceil(np.linalg.norm(b - a) / h))
        s = np.arange(1, k) / k
        chunks.append(a + s[:, None] * (b - a))
        feature += [("edge", e)] * (k - 1)
        ids = [i] + list(range(n_pts, n_pts + k - 1)) + [j]
        n_pts += k - 1
        edge_pts[(i, j)] = ids
        edge_pts[(j, i)] = ids[::-1]
    base_pts = np.vstack(chunks)
    tris = []
    for f, face in enumerate(P.faces):
        cyc = face.vertices
        n = np.cross(P.vertices[cyc[1]] - P.vertices[cyc[0]], P.vertices[cyc[2]] - P.vertices[cyc[0]])
        n /= np.linalg.norm(n)
        u, w = _plane_frame(n)
        corners = np.c_[P.vertices[list(cyc)] @ u, P.vertices[list(cyc)] @ w]
        ccw = np.sum(corners[:, 0] * np.roll(corners[:, 1], -1) - corners[:, 1] * np.roll(corners[:, 0], -1)) > 0
        boundary, push = [], []
        for k in range(len(cyc)):
            ids = edge_pts[(cyc[k], cyc[(k + 1) % len(cyc)])][:-1]
            boundary += ids
            s = np.arange(len(ids)) / len(ids)
            d = corners[(k + 1) % len(cyc)] - corners[k]
            normal = np.array([d[1], -d[0]]) if ccw else np.array([-d[1], d[0]])
            push.append((s * (1 - s))[:, None] * normal / np.linalg.norm(normal))
        # outward parabolic push, for triangulation only, makes collinear runs strictly convex
        push = np.vstack(push)
        poly = np.c_[base_pts[boundary] @ u, base_pts[boundary] @ w]
        if not ccw:
            corners = corners[::-1]
        # triangular lattice clipped to the face, kept away from its boundary
        lo, hi = corners.min(axis=0), corners.max(axis=0)
        xs = np.arange(lo[0], hi[0] + h, h)
        ys = np.arange(lo[1], hi[1] + h, h * math.sqrt(3) / 2)
        gx, gy = np.meshgrid(xs, ys)
        gx = gx + (np.arange(len(ys))[:, None] % 2) * h / 2
        grid = np.c_[gx.ravel(), gy.ravel()]
        edges = np.roll(corners, -1, axis=0) - corners
        lens = np.linalg.norm(edges, axis=1)
        dist = np.full(len(grid), np.inf)
        for c0, ed, ln in zip(corners, edges, lens):
            rel = grid - c0
            dist = np.minimum(dist, (ed[0] * rel[:, 1] - ed[1] * rel[:, 0]) / ln)
        inner = grid[dist > 0.4 * h]
        chunks.append(inner[:, :1] * u + inner[:, 1:] * w + face.plane.offset * n)
        feature += [("face", f)] * len(inner)
        ids = np.array(boundary + list(range(n_pts, n_pts + len(inner))), dtype=np.int64)
        n_pts += len(inner)
        tri_pts = np.vstack([poly + 0.05 * h * push, inner])
        tris.append(ids[Delaunay(tri_pts).simplices])
    points = np.vstack(chunks)
    triangles = np.vstack(tris)
    p = points[triangles]
    longest = max(float(np.linalg.norm(p[:, i] - p[:, (i + 1) % 3], axis=1).max()) for i in range(3))
    return BoundaryMesh(points, triangles, feature, longest)


def mesh_is_closed(mesh: BoundaryMesh) -> bool:
    """Every mesh edge is shared by exactly two triangles."""
    T = mesh.triangles
    e = np.sort(np.vstack([T[:, [0, 1]], T[:, [1, 2]], T[:, [2, 0]]]), axis=1)
    _, counts = np.unique(e, axis=0, return_counts=True)
    return bool(np.all(counts == 2))


@dataclass
class MeshCritical:
    kind: str  # "min", "saddle" or "max"
    vertex: int
    point: np.ndarray
    feature: tuple[str, int]
    multiplicity: int = 1


@dataclass
class MeshCriticalReport:
    n_min: int
    n_saddle: int
    n_max: int
    points: list[MeshCritical]
    resolution: float
    issues: list[str] = field(default_factory=list)

    @property
    def resolved(self) -> bool:
        return not self.issues

    @property
    def counts(self) -> tuple[int, int, int]:
        return self.n_min, self.n_saddle, self.n_max

    @property
    def total(self) -> int:
        return self.n_min + self.n_saddle + self.n_max


def mesh_critical_points(P: Polytope, y, resolution: float | None = None,
                         mesh: BoundaryMesh | None = None) -> MeshCriticalReport:
    """Piecewise linear critical points of ``|x - y|`` over a boundary mesh.

    ``resolution`` is the mesh spacing as a fraction of the polytope diameter
    (default 1/200). Ties are broken by mesh vertex index.
    """
    y = np.asarray(y, dtype=float)
    diam = float(np.max(np.linalg.norm(P.vertices[:, None] - P.vertices[None], axis=2)))
    resolution = 1 / 200 if resolution is None else resolution
    h = resolution * diam
    mesh = build_mesh(P, h) if mesh is None else mesh
    f = np.sum((mesh.points - y) ** 2, axis=1)
    order = np.lexsort((np.arange(len(f)), f))
    rank = np.empty(len(f), dtype=np.int64)
    rank[order] = np.arange(len(f))
    T = mesh.triangles
    changes = np.zeros(len(f), dtype=np.int64)
    higher = np.zeros(len(f), dtype=np.int64)
    degree = np.zeros(len(f), dtype=np.int64)
    for c in range(3):
        v, p, q = T[:, c], T[:, (c + 1) % 3], T[:, (c + 2) % 3]
        up_p = rank[p] > rank[v]
        up_q = rank[q] > rank[v]
        np.add.at(changes, v, (up_p != up_q).astype(np.int64))
        np.add.at(higher, v, up_p.astype(np.int64))
        np.add.at(degree, v, 1)
    pts: list[MeshCritical] = []
    for i in np.flatnonzero(changes == 0):
        kind = "min" if higher[i] == degree[i] else "max"
        pts.append(MeshCritical(kind, int(i), mesh.points[i], mesh.feature[i]))
    for i in np.flatnonzero(changes >= 4):
        pts.append(MeshCritical("saddle", int(i), mesh.points[i], mesh.feature[i], int(changes[i]) // 2 - 1))
    n_min = sum(p.kind == "min" for p in pts)
    n_max = sum(p.kind == "max" for p in pts)
    n_saddle = sum(p.multiplicity for p in pts if p.kind == "saddle")
    issues = []
    expected = {"min": "face", "saddle": "edge", "max": "vertex"}
    for p in pts:
        if p.feature[0] != expected[p.kind]:
            issues.append(f"{p.kind} at mesh vertex {p.vertex} lies on a {p.feature[0]}")
        if p.multiplicity > 1:
            issues.append(f"degenerate saddle at mesh vertex {p.vertex}")
    # a min or max next to a saddle means a birth-death pair the mesh cannot separate
    sad = np.array([p.point for p in pts if p.kind == "saddle"]).reshape(-1, 3)
    ext = np.array([p.point for p in pts if p.kind != "saddle"]).reshape(-1, 3)
    if len(sad) and len(ext):
        gap = float(np.min(np.linalg.norm(sad[:, None] - ext[None], axis=2)))
        if gap < h:
            issues.append(f"saddle within {gap:.3g} of an extremum; resolution too coarse")
    if n_min - n_saddle + n_max != 2:
        issues.append("mesh critical points violate the Euler relation")
    return MeshCriticalReport(n_min, n_saddle, n_max, pts, h, issues)


# ---------------------------------------------------------------------------
# spherical polygons

@dataclass(frozen=True)
class SphGridResult:
    points: np.ndarray  # (M, 3) sampled interior directions
    counts: np.ndarray  # (M,) short-maximum counts

    def max_count(self) -> int:
        return int(self.counts.max()) if len(self.counts) else 0

    def as_map(self) -> dict[tuple[float, float, float], int]:
        return {tuple(map(float, p)): int(c) for p, c in zip(self.points, self.counts)}


def sample_boundary(vertices: np.ndarray, per_edge: int) -> tuple[np.ndarray, np.ndarray]:
    """Points along the boundary arcs (slerp), each arc starting at its vertex."""
    V = np.asarray(vertices, dtype=float)
    out, is_vertex = [], []
    for i in range(len(V)):
        a, b = V[i], V[(i + 1) % len(V)]
        ang = math.acos(max(-1.0, min(1.0, float(a @ b))))
        s = np.linspace(0, 1, per_edge, endpoint=False)
        pts = (np.sin((1 - s) * ang)[:, None] * a + np.sin(s * ang)[:, None] * b) / math.sin(ang)
        out.append(pts)
        flags = np.zeros(per_edge, bool)
        flags[0] = True
        is_vertex.append(flags)
    return np.vstack(out), np.concatenate(is_vertex)


def _inside(vertices: np.ndarray, Ys: np.ndarray, margin: float = 0.0) -> np.ndarray:
    V = vertices
    ok = np.ones(len(Ys), bool)
    for i in range(len(V)):
        n = np.cross(V[i], V[(i + 1) % len(V)])
        ok &= Ys @ (n / np.linalg.norm(n)) > margin
    return ok


def sph_grid_oracle(vertices, resolution: float = 0.01, per_edge: int = 400,
                    margin: float = 1e-6) -> SphGridResult:
    """Short-maximum counts on a near-uniform grid over a spherical polygon.

    ``vertices`` are the polygon's unit vectors in counterclockwise order and
    ``resolution`` is the grid spacing in radians. A short maximum is a local
    maximum of the distance along the sampled boundary at distance below
    pi/2 (positive dot product).
    """
    V = np.asarray(vertices, dtype=float)
    V = V / np.linalg.norm(V, axis=1)[:, None]
    n = int(math.ceil(4 * math.pi / resolution ** 2))
    Ys = fibonacci_sphere(n)
    Ys = Ys[_inside(V, Ys, margin)]
    if len(Ys) == 0:
        return SphGridResult(np.zeros((0, 3)), np.zeros(0, dtype=int))
    counts = np.concatenate([short_max_counts(V, Ys[k:k + 2048], per_edge)
                             for k in range(0, len(Ys), 2048)])
    return SphGridResult(Ys, counts)


def sampled_core(vertices, Ys: np.ndarray, per_edge: int = 400) -> np.ndarray:
    """Whether every sampled boundary point is within pi/2 of each query."""
    B, _ = sample_boundary(np.asarray(vertices, dtype=float), per_edge)
    return np.min(np.asarray(Ys) @ B.T, axis=1) > 0


def _lune_widths(V: np.ndarray, axes: np.ndarray) -> np.ndarray:
    """Angle of the smallest lune with each given axis containing the points ``V``."""
    axes = axes / np.linalg.norm(axes, axis=1)[:, None]
    helper = np.where(np.abs(axes[:, :1]) < 0.9, np.array([[1.0, 0, 0]]), np.array([[0, 1.0, 0]]))
    u = np.cross(axes, helper)
    u /= np.linalg.norm(u, axis=1)[:, None]
    w = np.cross(axes, u)
    ang = np.sort(np.arctan2(w @ V.T, u @ V.T), axis=1)
    gaps = np.diff(np.c_[ang, ang[:, :1] + 2 * np.pi], axis=1)
    return 2 * np.pi - gaps.max(axis=1)


def pole_grid_bigon(vertices, step_deg: float = 1.0, refine: bool = True) -> tuple[float, np.ndarray]:
    """Minimal lune angle by scanning lune axes on a latitude-longitude grid.

    With ``refine`` the best grid axes seed a Nelder-Mead polish.
    """
    V = np.asarray(vertices, dtype=float)
    V = V / np.linalg.norm(V, axis=1)[:, None]
    lat = np.radians(np.arange(-90 + step_deg / 2, 90, step_deg))
    lon = np.radians(np.arange(0, 180, step_deg))  # axes are sign-agnostic
    L, M = np.meshgrid(lat, lon)
    axes = np.c_[(np.cos(L) * np.cos(M)).ravel(), (np.cos(L) * np.sin(M)).ravel(), np.sin(L).ravel()]
    vals = _lune_widths(V, axes)
    best = int(np.argmin(vals))
    width, axis = float(vals[best]), axes[best]
    if not refine:
        return width, axis
    def f(q):
        return float(_lune_widths(V, q[None])[0])

    # the width is only piecewise smooth, so restart the simplex until it stalls
    for k in np.argsort(vals)[:5]:
        x, fx = axes[k], float(vals[k])
        for _ in range(20):
            res = minimize(f, x, method="Nelder-Mead",
                           options={"xatol": 1e-13, "fatol": 1e-15, "maxfev": 6000,
                                    "initial_simplex": x + np.vstack([np.zeros(3), 1e-3 * np.eye(3)])})
            if res.fun >= fx - 1e-15:
                break
            x, fx = res.x / np.linalg.norm(res.x), float(res.fun)
        if fx < width:
            width, axis = fx, x
    return width, axis


def short_max_counts(vertices, Ys, per_edge: int = 400) -> np.ndarray:
    """Sampled short-maximum counts at given interior directions."""
    V = np.asarray(vertices, dtype=float)
    B, _ = sample_boundary(V / np.linalg.norm(V, axis=1)[:, None], per_edge)
    D = np.atleast_2d(Ys) @ B.T
    local_far = (D < np.roll(D, 1, axis=1)) & (D < np.roll(D, -1, axis=1))
    return (local_far & (D > 0)).sum(axis=1)


# ---------------------------------------------------------------------------
# width and hull

def fibonacci_sphere(n: int) -> np.ndarray:
    i = np.arange(n) + 0.5
    z = 1 - 2 * i / n
    r = np.sqrt(1 - z * z)
    phi = np.pi * (1 + 5 ** 0.5) * i
    return np.c_[r * np.cos(phi), r * np.sin(phi), z]


def width_extrema_sampling(vertices, n_dirs: int = 20000) -> tuple[int, int]:
    """Numbers of local maxima and minima of the width on the projective plane."""
    V = np.asarray(vertices, dtype=float)
    D = fibonacci_sphere(n_dirs)
    s = D @ V.T
    wdt = s.max(axis=1) - s.min(axis=1)
    nbrs = ConvexHull(D).simplices
    is_max = np.ones(n_dirs, bool)
    is_min = np.ones(n_dirs, bool)
    for c in range(3):
        a = nbrs[:, c]
        for o in (nbrs[:, (c + 1) % 3], nbrs[:, (c + 2) % 3]):
            np.logical_and.at(is_max, a, wdt[a] > wdt[o])
            np.logical_and.at(is_min, a, wdt[a] < wdt[o])
    return int(is_max.sum()) // 2, int(is_min.sum()) // 2


def _support_gap(s: np.ndarray, tie: float) -> float:
    """Smallest distance from a support plane to a vertex not lying on it."""
    gaps = []
    for vals in (s - s.min(), s.max() - s):
        off = vals[vals > tie]
        if len(off):
            gaps.append(float(off.min()))
    return min(gaps) if gaps else 0.0


def width_local_type(vertices, u, n_dirs: int = 32, angle: float | None = None, seed: int = 0) -> str:
    """``"max"``, ``"min"`` or ``"mixed"`` by comparing against perturbed directions.

    By default the perturbation angle is a tenth of the smallest gap between a
    support plane and the next vertex (relative to the diameter), capped at
    1e-3, so that the test stays inside the local neighbourhood.
    """
    V = np.asarray(vertices, dtype=float)
    u = np.asarray(u, dtype=float)
    if angle is None:
        diam = float(np.max(np.linalg.norm(V[:, None] - V[None], axis=2)))
        gap = _support_gap(V @ u, 1e-9 * diam)
        angle = min(1e-3, 0.1 * gap / diam) if gap > 0 else 1e-3
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(n_dirs, 3))
    g -= (g @ u)[:, None] * u
    g /= np.linalg.norm(g, axis=1)[:, None]
    D = math.cos(angle) * u + math.sin(angle) * g
    s0 = V @ u
    w0 = s0.max() - s0.min()
    s = D @ V.T
    w = s.max(axis=1) - s.min(axis=1)
    if np.all(w < w0):
        return "max"
    if np.all(w > w0):
        return "min"
    return "mixed"


def brute_force_facets(points, eps: float = 1e-9) -> set[frozenset[int]]:
    """Vertex sets of hull facets by testing every plane through three points."""
    X = np.asarray(points, dtype=float)
    scale = float(np.ptp(X, axis=0).max())
    facets = set()
    for i, j, k in itertools.combinations(range(len(X)), 3):
        n = np.cross(X[j] - X[i], X[k] - X[i])
        if np.linalg.norm(n) < eps * scale * scale:
            continue
        n /= np.linalg.norm(n)
        d = (X - X[i]) @ n
        if np.all(d <= eps * scale) or np.all(d >= -eps * scale):
            facets.add(frozenset(np.flatnonzero(np.abs(d) <= eps * scale).tolist()))
    # keep only extreme points on each facet
    hull_pts = set(ConvexHull(X).vertices.tolist())
    return {frozenset(s & hull_pts) for s in facets}


def grid_inball(P: Polytope, n: int = 40, levels: int = 6) -> tuple[np.ndarray, float]:
    """Best inscribed-ball centre over a regular grid refined around the best node."""
    N, off = P.face_normals, P.face_offsets
    lo, hi = P.vertices.min(axis=0), P.vertices.max(axis=0)
    best_c, best_r = None, -np.inf
    for _ in range(levels):
        axes = [np.linspace(lo[i], hi[i], n) for i in range(3)]
        G = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
        r = np.min(off[None] - G @ N.T, axis=1)
        k = int(np.argmax(r))
        if r[k] > best_r:
            best_c, best_r = G[k], float(r[k])
        span = (hi - lo) / n * 2
        lo, hi = best_c - span, best_c + span
    return best_c, best_r
