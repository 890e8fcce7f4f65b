import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polynorm.errors import DegenerateGeometryError
from polynorm.oracle import brute_force_facets
from polynorm.polytope import (acute_circuit, build_hull, circuit_vertices, cube, is_generic,
                               perturb_generic, projective_map, random_sphere_hull, validate_genericity)


def _sphere_points(n, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, 3))
    return x / np.linalg.norm(x, axis=1)[:, None]


def test_tetrahedron_lattice():
    P = build_hull([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]])
    assert (P.n_vertices, P.n_edges, P.n_faces) == (4, 6, 4)
    assert P.euler_characteristic == 2


def test_cube_lattice(unit_cube):
    assert (unit_cube.n_vertices, unit_cube.n_edges, unit_cube.n_faces) == (8, 12, 6)
    assert all(len(f.vertices) == 4 for f in unit_cube.faces)


def test_interior_and_collinear_points_dropped():
    pts = list(itertools.product([0, 1], repeat=3)) + [(0.5, 0.5, 0.5), (0.5, 0, 0), (0.5, 0.5, 0)]
    P = build_hull(pts)
    assert P.n_vertices == 8 and P.n_faces == 6
    assert sorted(P.point_index) == list(range(8))


@pytest.mark.parametrize("seed", range(5))
def test_random_facets_match_brute_force(seed):
    pts = _sphere_points(10, seed)
    P = build_hull(pts)
    assert all(len(f.vertices) == 3 for f in P.faces)
    ours = {frozenset(int(P.point_index[v]) for v in f.vertices) for f in P.faces}
    assert ours == brute_force_facets(pts)


@pytest.mark.parametrize("pts", [
    [[0, 0, 0], [1, 0, 0], [0, 1, 0]],
    [[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0], [2, 3, 0]],
    [[0, 0, 0], [1, 0, 0], [0, 1, 0], [np.nan, 0, 1]],
])
def test_degenerate_input(pts):
    with pytest.raises(DegenerateGeometryError):
        build_hull(pts)


def test_validator_rejects_cube_and_tetrahedron(unit_cube, tetra):
    rules = validate_genericity(unit_cube).rules_violated()
    assert {"edge-edge-orthogonal", "edge-edge-parallel"} <= rules
    assert "edge-edge-orthogonal" in validate_genericity(tetra).rules_violated()


def test_perturbed_cube_is_generic_with_same_lattice(unit_cube):
    Q = perturb_generic(unit_cube, seed=1, magnitude=1e-3)
    assert is_generic(Q)
    assert Q.face_vertex_sets() == unit_cube.face_vertex_sets()
    assert np.max(np.abs(Q.vertices - unit_cube.vertices)) < 1e-2


def test_generic_input_unchanged():
    P = random_sphere_hull(9, seed=3)
    assert is_generic(P)
    assert perturb_generic(P, seed=5) is P


def test_projective_map_converges_to_identity(unit_cube):
    V = np.asarray(unit_cube.vertices)
    errs = [np.max(np.abs(projective_map(V, 0, m) - V)) for m in (1e-2, 1e-4, 1e-6)]
    assert errs[0] > errs[1] > errs[2] and errs[2] < 1e-5


def test_perturb_rejects_bad_magnitude(unit_cube):
    with pytest.raises(ValueError):
        perturb_generic(unit_cube, magnitude=0.5)


def test_acute_circuit_cube_empty(unit_cube):
    assert acute_circuit(unit_cube).is_empty


def test_acute_circuit_tetrahedron(tetra):
    A = acute_circuit(tetra)
    assert len(A.acute_edges) == 6
    assert all(d == 3 for d in A.degree.values())
    assert not A.is_full_decomposition and A.components == []


@pytest.mark.parametrize("seed", range(5))
def test_pancake_rim_is_one_acute_cycle(seed):
    x = _sphere_points(12, seed)
    x[:, 2] *= 0.02
    P = build_hull(x)
    A = acute_circuit(P)
    rim = [e for e, E in enumerate(P.edges)
           if P.face_normals[E.faces[0]][2] * P.face_normals[E.faces[1]][2] < 0]
    assert A.is_full_decomposition and len(A.components) == 1
    assert sorted(A.components[0]) == sorted(rim)
    cyc = A.components[0]
    verts = circuit_vertices(P, cyc)
    assert len(set(verts)) == len(cyc)


@settings(max_examples=30, deadline=None)
@given(st.integers(5, 20), st.integers(0, 10**6))
def test_lattice_invariants(n, seed):
    P = random_sphere_hull(n, seed=seed, generic=False)
    assert P.n_vertices - P.n_edges + P.n_faces == 2
    dist = P.vertices @ P.face_normals.T - P.face_offsets
    assert dist.max() <= P.tol.eps_len
    ang = P.dihedral_angles()
    assert np.all((ang > 0) & (ang < np.pi))
    for e in P.edges:
        assert len(e.faces) == 2
