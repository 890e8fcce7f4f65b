"""Convex polytopes with an explicit face lattice.

The hull is computed with qhull (``scipy.spatial.ConvexHull``); coplanar
triangles are then merged into maximal planar facets and collinear boundary
points dropped, so the lattice only ever contains extreme points.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import DegenerateGeometryError, GenericityError
from .geom import Plane, Tolerance, convex_hull_2d, orthonormal_basis, unit


@dataclass(frozen=True)
class Face:
    vertices: tuple[int, ...]  # counterclockwise about the outward normal
    plane: Plane


@dataclass(frozen=True)
class Edge:
    vertices: tuple[int, int]  # sorted vertex ids
    faces: tuple[int, int]


class Polytope:
    """Immutable convex polytope in R^3.

    Parameters
    ----------
    vertices : (V, 3) array
    faces : list of Face
    edges : list of Edge
    tol : Tolerance
    point_index : (V,) int array, index of each vertex in the original input
    """

    def __init__(self, vertices, faces, edges, tol, point_index=None):
        verts = np.array(vertices, dtype=float)
        verts.setflags(write=False)
        self.vertices = verts
        self.faces = list(faces)
        self.edges = list(edges)
        self.tol = tol
        idx = np.arange(len(verts)) if point_index is None else np.asarray(point_index)
        idx.setflags(write=False)
        self.point_index = idx
        self._edge_by_pair = {e.vertices: i for i, e in enumerate(self.edges)}

    def __repr__(self):
        return f"Polytope(V={self.n_vertices}, E={self.n_edges}, F={self.n_faces})"

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_faces

    def edge_id(self, u: int, v: int) -> int:
        return self._edge_by_pair[(min(u, v), max(u, v))]

    @cached_property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.vertices.max(axis=0) - self.vertices.min(axis=0)))

    @cached_property
    def centroid(self) -> np.ndarray:
        return self.vertices.mean(axis=0)

    @cached_property
    def face_normals(self) -> np.ndarray:
        return np.array([f.plane.unit_normal for f in self.faces])

    @cached_property
    def face_offsets(self) -> np.ndarray:
        return np.array([f.plane.offset for f in self.faces])

    @cached_property
    def vertex_edges(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for i, e in enumerate(self.edges):
            for v in e.vertices:
                out[v].append(i)
        return out

    @cached_property
    def vertex_faces(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for i, f in enumerate(self.faces):
            for v in f.vertices:
                out[v].append(i)
        return out

    @cached_property
    def face_edges(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n_faces)]
        for i, e in enumerate(self.edges):
            for f in e.faces:
                out[f].append(i)
        return out

    @cached_property
    def edge_endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        ids = np.array([e.vertices for e in self.edges])
        return self.vertices[ids[:, 0]], self.vertices[ids[:, 1]]

    @cached_property
    def edge_directions(self) -> np.ndarray:
        a, b = self.edge_endpoints
        d = b - a
        return d / np.linalg.norm(d, axis=1)[:, None]

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        a, b = self.edge_endpoints
        return np.linalg.norm(b - a, axis=1)

    @cached_property
    def in_face_directions(self) -> np.ndarray:
        """(E, 2, 3): unit vector in face ``edge.faces[s]``, orthogonal to the edge, pointing into the face."""
        a, _ = self.edge_endpoints
        d = self.edge_directions
        out = np.empty((self.n_edges, 2, 3))
        for i, e in enumerate(self.edges):
            for s, f in enumerate(e.faces):
                t = np.cross(self.face_normals[f], d[i])
                t /= np.linalg.norm(t)
                inner = self.vertices[list(self.faces[f].vertices)].mean(axis=0) - a[i]
                out[i, s] = t if t @ inner > 0 else -t
        return out

    @cached_property
    def dihedral_cosines(self) -> np.ndarray:
        """Cosine of the interior dihedral angle of each edge."""
        n = self.face_normals
        f = np.array([e.faces for e in self.edges])
        return -np.einsum("ij,ij->i", n[f[:, 0]], n[f[:, 1]])

    def dihedral_angles(self) -> np.ndarray:
        return np.arccos(np.clip(self.dihedral_cosines, -1.0, 1.0))

    def face_signed_distances(self, y) -> np.ndarray:
        return self.face_normals @ np.asarray(y, dtype=float) - self.face_offsets

    def contains(self, y, strict: bool = True) -> bool:
        d = self.face_signed_distances(y)
        return bool(np.all(d < -self.tol.eps_len)) if strict else bool(np.all(d <= self.tol.eps_len))

    def face_vertex_sets(self) -> set[frozenset[int]]:
        """Faces as sets of original point indices (for lattice comparison)."""
        return {frozenset(int(self.point_index[v]) for v in f.vertices) for f in self.faces}

    def neighbors(self, v: int) -> list[int]:
        return [self.edges[e].vertices[0] if self.edges[e].vertices[1] == v
                else self.edges[e].vertices[1] for e in self.vertex_edges[v]]


def _merge_groups(hull: ConvexHull, pts: np.ndarray, eps: float) -> list[list[int]]:
    n = len(hull.simplices)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    eq = hull.equations
    for i in range(n):
        for j in hull.neighbors[i]:
            if j <= i:
                continue
            # coplanar if each triangle's vertices lie on the other's plane
            dij = np.abs(pts[hull.simplices[j]] @ eq[i, :3] + eq[i, 3]).max()
            dji = np.abs(pts[hull.simplices[i]] @ eq[j, :3] + eq[j, 3]).max()
            if max(dij, dji) <= eps:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def build_hull(points, tol: Tolerance | None = None) -> Polytope:
    """Convex hull of a point cloud as a Polytope with maximal planar facets."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise DegenerateGeometryError("expected an (n, 3) array of points")
    if len(pts) < 4:
        raise DegenerateGeometryError("need at least 4 points")
    if not np.all(np.isfinite(pts)):
        raise DegenerateGeometryError("non-finite coordinates")
    tol = tol or Tolerance.for_points(pts)
    try:
        hull = ConvexHull(pts)
    except QhullError as exc:
        raise DegenerateGeometryError(f"coplanar or degenerate input: {exc.args[0].splitlines()[0]}") from None

    raw_faces = []
    for group in _merge_groups(hull, pts, tol.eps_len):
        ids = sorted({int(v) for s in group for v in hull.simplices[s]})
        normal = unit(hull.equations[group, :3].sum(axis=0))
        u, w = orthonormal_basis(normal)
        local = pts[ids] @ np.column_stack([u, w])
        corners = [ids[k] for k in convex_hull_2d(local, tol.eps_len)]
        if len(corners) < 3:
            raise DegenerateGeometryError("degenerate facet")
        offset = float(np.max(pts[corners] @ normal))
        raw_faces.append((corners, normal, offset))

    extreme = sorted({v for f in raw_faces for v in f[0]})
    if len(extreme) < 4:
        raise DegenerateGeometryError("fewer than 4 extreme points")
    remap = {old: new for new, old in enumerate(extreme)}
    faces = []
    for corners, normal, offset in raw_faces:
        cyc = [remap[v] for v in corners]
        k = cyc.index(min(cyc))
        faces.append((tuple(cyc[k:] + cyc[:k]), normal, offset))
    faces.sort(key=lambda f: f[0])
    return _assemble(pts[extreme], [(c, Plane(n, o)) for c, n, o in faces], tol,
                     point_index=np.array(extreme))


def _assemble(verts, face_specs, tol, point_index=None) -> Polytope:
    faces = [Face(tuple(c), pl) for c, pl in face_specs]
    directed: dict[tuple[int, int], int] = {}
    for fi, f in enumerate(faces):
        cyc = f.vertices
        for k in range(len(cyc)):
            key = (cyc[k], cyc[(k + 1) % len(cyc)])
            if key in directed:
                raise DegenerateGeometryError("inconsistent face orientation")
            directed[key] = fi
    edges = []
    for (u, v), f in sorted(directed.items()):
        if u > v:
            continue
        if (v, u) not in directed:
            raise DegenerateGeometryError("edge with a single incident face")
        edges.append(Edge((u, v), (f, directed[(v, u)])))
    if 2 * len(edges) != len(directed):
        raise DegenerateGeometryError("unmatched directed edges")
    P = Polytope(verts, faces, edges, tol, point_index=point_index)
    if P.euler_characteristic != 2:
        raise DegenerateGeometryError(f"Euler characteristic {P.euler_characteristic} != 2")
    # every vertex on or inside every face plane
    if np.max(P.vertices @ P.face_normals.T - P.face_offsets) > tol.eps_len:
        raise DegenerateGeometryError("non-convex face lattice")
    return P


# ---------------------------------------------------------------------------
# genericity

RULES = ("edge-edge-orthogonal", "edge-face-parallel", "edge-edge-parallel",
         "face-face-parallel", "vertex-on-nonincident-sheet")


@dataclass(frozen=True)
class Violation:
    rule: str
    features: tuple
    defect: float


@dataclass
class GenericityReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def rules_violated(self) -> set[str]:
        return {v.rule for v in self.violations}


def validate_genericity(P: Polytope, tol: Tolerance | None = None) -> GenericityReport:
    tol = tol or P.tol
    out: list[Violation] = []
    d = P.edge_directions
    n = P.face_normals
    E, F = P.n_edges, P.n_faces

    dots = d @ d.T
    for i, j in itertools.combinations(range(E), 2):
        c = abs(dots[i, j])
        if c < tol.eps_ang:
            out.append(Violation("edge-edge-orthogonal", (("edge", i), ("edge", j)), c))
        elif 1.0 - c < tol.eps_ang:
            out.append(Violation("edge-edge-parallel", (("edge", i), ("edge", j)), 1.0 - c))

    ef = np.abs(d @ n.T)
    for i in range(E):
        incident = set(P.edges[i].faces)
        for f in range(F):
            if f not in incident and ef[i, f] < tol.eps_ang:
                out.append(Violation("edge-face-parallel", (("edge", i), ("face", f)), float(ef[i, f])))

    ff = n @ n.T
    for i, j in itertools.combinations(range(F), 2):
        c = 1.0 - abs(ff[i, j])
        if c < tol.eps_ang:
            out.append(Violation("face-face-parallel", (("face", i), ("face", j)), c))

    a, _ = P.edge_endpoints
    t = P.in_face_directions
    V = P.vertices
    for i, e in enumerate(P.edges):
        others = [w for w in range(P.n_vertices) if w not in e.vertices]
        rel = V[others] - a[i]
        for s, f in enumerate(e.faces):
            dist = np.abs(rel @ t[i, s])
            for w, dw in zip(others, dist):
                if dw < tol.eps_len:
                    out.append(Violation("vertex-on-nonincident-sheet",
                                         (("vertex", w), ("blue", i, f)), float(dw)))
        for v in e.vertices:
            dist = np.abs((V - V[v]) @ d[i])
            for w in range(P.n_vertices):
                if w != v and dist[w] < tol.eps_len:
                    out.append(Violation("vertex-on-nonincident-sheet",
                                         (("vertex", w), ("red", i, v)), float(dist[w])))
    return GenericityReport(out)


def is_generic(P: Polytope, tol: Tolerance | None = None) -> bool:
    return validate_genericity(P, tol).passed


def projective_map(points: np.ndarray, seed, magnitude: float) -> np.ndarray:
    """Apply a seeded projective transform within ``magnitude`` of the identity.

    Coordinates are normalized to the unit-diameter frame around the centroid
    before the 4x4 map is applied, and mapped back afterwards.
    """
    rng = np.random.default_rng(seed)
    M = np.eye(4) + magnitude * rng.uniform(-1.0, 1.0, size=(4, 4))
    M /= M[3, 3]
    center = points.mean(axis=0)
    scale = float(np.linalg.norm(points.max(axis=0) - points.min(axis=0)))
    x = (points - center) / scale
    h = np.column_stack([x, np.ones(len(x))]) @ M.T
    if np.any(h[:, 3] <= 0):
        raise GenericityError("projective map sends a point to infinity")
    return h[:, :3] / h[:, 3:] * scale + center


def perturb_generic(P: Polytope, seed: int = 0, magnitude: float = 1e-3,
                    max_attempts: int = 25) -> Polytope:
    """Return a generic polytope with the same face lattice as ``P``.

    Already-generic input is returned unchanged.
    """
    if not 0.0 < magnitude < 0.1:
        raise ValueError("magnitude must lie in (0, 0.1)")
    if is_generic(P):
        return P
    target = {frozenset(f.vertices) for f in P.faces}
    rel = P.tol.eps_len / max(P.diameter, np.finfo(float).tiny)
    last = "no attempt"
    for attempt in range(max_attempts):
        pts = projective_map(np.asarray(P.vertices), [seed, attempt], magnitude)
        try:
            Q = build_hull(pts, Tolerance.for_points(pts, rel=rel, eps_ang=P.tol.eps_ang))
        except DegenerateGeometryError as exc:
            last = str(exc)
            continue
        if Q.n_vertices != P.n_vertices or Q.face_vertex_sets() != target:
            last = "combinatorial type changed"
            continue
        if is_generic(Q):
            return Q
        last = "still non-generic"
    raise GenericityError(f"perturbation failed after {max_attempts} attempts ({last})")


# ---------------------------------------------------------------------------
# acute edges

@dataclass(frozen=True)
class AcuteCircuit:
    components: list[list[int]]  # closed edge-id cycles
    acute_edges: list[int]
    degree: dict[int, int]  # acute degree per incident vertex
    is_full_decomposition: bool

    @property
    def is_empty(self) -> bool:
        return not self.acute_edges


def acute_circuit(P: Polytope, tol: Tolerance | None = None) -> AcuteCircuit:
    """Acute edges (interior dihedral < pi/2) and their decomposition into cycles."""
    tol = tol or P.tol
    acute = [i for i, c in enumerate(P.dihedral_cosines) if c > tol.eps_ang]
    degree: dict[int, int] = {}
    adj: dict[int, list[int]] = {}
    for i in acute:
        for v in P.edges[i].vertices:
            degree[v] = degree.get(v, 0) + 1
            adj.setdefault(v, []).append(i)

    seen: set[int] = set()
    components: list[list[int]] = []
    for start in acute:
        if start in seen:
            continue
        # connected component of the acute-edge graph
        comp, stack, verts = set(), [start], set()
        while stack:
            e = stack.pop()
            if e in comp:
                continue
            comp.add(e)
            for v in P.edges[e].vertices:
                verts.add(v)
                stack.extend(adj[v])
        seen |= comp
        if all(degree[v] == 2 for v in verts):
            components.append(_walk_cycle(P, sorted(comp), adj))
    covered = sum(len(c) for c in components)
    return AcuteCircuit(components, acute, degree, is_full_decomposition=covered == len(acute))


def _walk_cycle(P: Polytope, comp: list[int], adj: dict[int, list[int]]) -> list[int]:
    first = comp[0]
    cycle = [first]
    v = P.edges[first].vertices[1]
    prev = first
    while True:
        nxt = adj[v][0] if adj[v][0] != prev else adj[v][1]
        if nxt == first:
            return cycle
        cycle.append(nxt)
        a, b = P.edges[nxt].vertices
        v = b if a == v else a
        prev = nxt


def circuit_vertices(P: Polytope, cycle: list[int]) -> list[int]:
    """Vertex sequence of an edge cycle; vertex k joins edges k-1 and k."""
    out = []
    for k, e in enumerate(cycle):
        prev = set(P.edges[cycle[k - 1]].vertices)
        shared = prev & set(P.edges[e].vertices)
        out.append(next(iter(shared)))
    return out


# ---------------------------------------------------------------------------
# constructors used by tests and the CLI

def random_sphere_hull(n_points: int, seed, generic: bool = True) -> Polytope:
    """Hull of ``n_points`` uniform points on the unit sphere."""
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n_points, 3))
    x /= np.linalg.norm(x, axis=1)[:, None]
    P = build_hull(x)
    if generic and not is_generic(P):
        P = perturb_generic(P, seed=int(rng.integers(2**31)), magnitude=1e-3)
    return P


def cube(side: float = 1.0) -> Polytope:
    return build_hull(side * np.array(list(itertools.product([0.0, 1.0], repeat=3))))


def regular_tetrahedron(edge: float = 1.0) -> Polytope:
    pts = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    return build_hull(pts * edge / (2 * np.sqrt(2)))
