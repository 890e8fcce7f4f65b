import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polynorm.errors import OnSheetError, PointOutsideError
from polynorm.bifurcation import build_sheets
from polynorm.geom import Location
from polynorm.normals import (FeatureKind, MorseType, NormalCount, active_region_contains,
                              circuit_extrema, count_normals, normals_from, sheet_clearance)
from polynorm.oracle import mesh_critical_points
from polynorm.polytope import acute_circuit, build_hull, random_sphere_hull
from polynorm.spherical import core_contains, vertex_figure

CENTRE = np.array([0.5, 0.5, 0.5])


def _interior_point(P, rng):
    w = rng.dirichlet(np.ones(P.n_vertices))
    return w @ P.vertices


def _pancake(quad, height=0.1):
    c = quad.mean(axis=0)
    pts = np.vstack([np.c_[quad, np.zeros(len(quad))], [[*c, height], [*c, -height]]])
    P = build_hull(pts)
    return P, acute_circuit(P)


# golden counts, pinned after the mesh oracle reproduced them

def test_tetrahedron_centroid(tetra):
    records, count = normals_from(tetra, tetra.centroid)
    assert (count.n_min, count.n_saddle, count.n_max) == (4, 6, 4)
    assert count.total == 14 == 2 + 2 * count.n_saddle
    for r in records:
        if r.morse_type == MorseType.SADDLE:
            a, b = tetra.edges[r.feature[1]].vertices
            assert np.allclose(r.base, 0.5 * (tetra.vertices[a] + tetra.vertices[b]))


def test_cube_centre(unit_cube):
    count = count_normals(unit_cube, CENTRE)
    assert (count.n_min, count.n_saddle, count.n_max) == (6, 12, 8)
    assert count.total == 26


def test_goldens_match_mesh_oracle(tetra, unit_cube):
    assert mesh_critical_points(tetra, tetra.centroid, 1 / 50).counts == (4, 6, 4)
    assert mesh_critical_points(unit_cube, CENTRE, 1 / 50).counts == (6, 12, 8)


def test_outside_point_rejected(unit_cube):
    with pytest.raises(PointOutsideError):
        normals_from(unit_cube, [2.0, 0.5, 0.5])
    with pytest.raises(PointOutsideError):
        normals_from(unit_cube, [1.0, 0.5, 0.5])


def test_cube_and_tetrahedron_have_constant_counts(unit_cube, tetra, rng):
    # every sheet of these lies on the boundary, so the count never changes inside
    for _ in range(50):
        assert count_normals(unit_cube, rng.uniform(0.01, 0.99, 3)).total == 26
        assert count_normals(tetra, _interior_point(tetra, rng)).total == 14


def test_on_sheet_rejected():
    P = random_sphere_hull(9, seed=4)
    sheet = next(s for s in build_sheets(P) if not s.is_empty)
    with pytest.raises(OnSheetError):
        normals_from(P, sheet.region.mean(axis=0))


def test_active_regions_at_cube_centre(unit_cube):
    for f in range(unit_cube.n_faces):
        assert active_region_contains(unit_cube, ("face", f), CENTRE) == Location.INSIDE
    for e in range(unit_cube.n_edges):
        assert active_region_contains(unit_cube, ("edge", e), CENTRE) == Location.INSIDE


@pytest.mark.parametrize("seed", range(3))
def test_point_near_face_centre_misses_some_vertex(seed):
    P = random_sphere_hull(10, seed=(17, seed))
    f = 0
    centre = P.vertices[list(P.faces[f].vertices)].mean(axis=0)
    y = centre - 0.01 * P.diameter * P.face_normals[f]
    verdicts = [active_region_contains(P, ("vertex", v), y) for v in range(P.n_vertices)]
    assert Location.OUTSIDE in verdicts
    rep = mesh_critical_points(P, y, 1 / 100)
    mesh_max = {c.feature[1] for c in rep.points if c.kind == "max"}
    assert mesh_max == {v for v, loc in enumerate(verdicts) if loc == Location.INSIDE}


def test_count_arithmetic():
    c = NormalCount(4, 6, 4)
    assert c.as_dict() == {"n_min": 4, "n_saddle": 6, "n_max": 4, "total": 14}
    assert NormalCount(5, 7, 4) - c == (1, 1, 0)


@settings(max_examples=60, deadline=None)
@given(st.integers(5, 14), st.integers(0, 10**6))
def test_parity_and_orthogonality(n, seed):
    P = random_sphere_hull(n, seed=seed)
    rng = np.random.default_rng(seed)
    y = _interior_point(P, rng)
    try:
        records, count = normals_from(P, y)
    except OnSheetError:
        return
    assert count.total == 2 + 2 * count.n_saddle and count.total % 2 == 0
    eps = 1e-9
    for r in records:
        kind, i = r.feature
        if kind == FeatureKind.FACE:
            assert np.linalg.norm(np.cross(r.base - y, P.face_normals[i])) < eps
        elif kind == FeatureKind.EDGE:
            assert abs((r.base - y) @ P.edge_directions[i]) < eps
    far = int(np.argmax(np.linalg.norm(P.vertices - y, axis=1)))
    maxima = [r.feature[1] for r in records if r.morse_type == MorseType.MAX]
    assert far in maxima


@pytest.mark.parametrize("seed", range(20))
def test_counts_match_mesh_oracle(seed):
    P = random_sphere_hull(6 + seed % 5, seed=(11, seed))
    rng = np.random.default_rng(seed)
    cands = [_interior_point(P, rng) for _ in range(400)]
    y = max(cands, key=lambda c: sheet_clearance(P, c))
    # the mesh only resolves critical points separated by a few cells
    assert sheet_clearance(P, y) > 2 / 200 * P.diameter
    count = count_normals(P, y)
    rep = mesh_critical_points(P, y, 1 / 200)
    assert rep.counts == (count.n_min, count.n_saddle, count.n_max)


@pytest.mark.parametrize("seed", range(5))
def test_vertex_max_iff_direction_in_core(seed):
    P = random_sphere_hull(10, seed=(13, seed))
    rng = np.random.default_rng(seed)
    checked = 0
    for _ in range(40):
        y = _interior_point(P, rng)
        try:
            records, _ = normals_from(P, y)
        except OnSheetError:
            continue
        maxima = {r.feature[1] for r in records if r.morse_type == MorseType.MAX}
        for v in range(P.n_vertices):
            Q = vertex_figure(P, v)
            Y = (y - P.vertices[v]) / np.linalg.norm(y - P.vertices[v])
            try:
                inside = core_contains(Q, Y)
            except PointOutsideError:
                continue
            assert inside == (v in maxima)
            checked += 1
    assert checked > 0


def test_square_circuit_above_centre():
    P, A = _pancake(np.array([[0.0, 0], [1, 0], [1, 1], [0, 1]]))
    assert len(A.components) == 1 and len(A.components[0]) == 4
    ce = circuit_extrema(P, A, [0.5, 0.5, 0.001])
    assert ce.per_component == [(4, 4)]
    feet = sorted(tuple(np.round(f[:2], 12)) for _, f in ce.minima)
    assert feet == [(0.0, 0.5), (0.5, 0.0), (0.5, 1.0), (1.0, 0.5)]


def _polyline_extrema(quad, y, per_edge=4000):
    poly = np.vstack([quad, quad[:1]])
    s = np.linspace(0, 1, per_edge, endpoint=False)[:, None]
    path = np.vstack([a + (b - a) * s for a, b in zip(poly[:-1], poly[1:])])
    d = np.linalg.norm(path - y[:2], axis=1)
    lo = (d < np.roll(d, 1)) & (d < np.roll(d, -1))
    hi = (d > np.roll(d, 1)) & (d > np.roll(d, -1))
    return int(lo.sum()), int(hi.sum())


def test_skinny_circuit_two_and_two():
    quad = np.array([[0.0, 0], [4, 0], [4.3, 1.0], [0.2, 0.6]])
    P, A = _pancake(quad)
    y = np.array([2.1, 0.33, 0.0005])
    ce = circuit_extrema(P, A, y)
    assert ce.per_component == [(2, 2)] == [_polyline_extrema(quad, y)]
    assert ce.vertex_minima == []


@pytest.mark.parametrize("seed", range(5))
def test_circuit_extrema_match_polyline_oracle(seed):
    rng = np.random.default_rng(seed)
    phi = np.sort(rng.uniform(0, 2 * np.pi, 5))
    quad = np.c_[np.cos(phi) * rng.uniform(0.5, 2), np.sin(phi)]
    P, A = _pancake(quad, 0.05)
    if len(A.components) != 1:
        pytest.skip("rim is not the only acute cycle")
    for _ in range(10):
        w = rng.dirichlet(np.ones(len(quad)))
        y = np.r_[w @ quad, 0.0001]
        if not P.contains(y):
            continue
        ce = circuit_extrema(P, A, y)
        assert ce.per_component == [_polyline_extrema(quad, y)]


def test_circuit_extrema_needs_a_cycle(tetra):
    with pytest.raises(ValueError):
        circuit_extrema(tetra, acute_circuit(tetra), tetra.centroid)
