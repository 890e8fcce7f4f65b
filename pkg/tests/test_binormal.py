import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polynorm.binormal import EE, VE, VF, VV, enumerate_binormals, width, widths
from polynorm.oracle import fibonacci_sphere, width_local_type
from polynorm.polytope import random_sphere_hull


def test_cube_widths(unit_cube):
    assert width(unit_cube, [1.0, 0, 0]).width == pytest.approx(1.0)
    assert width(unit_cube, np.ones(3) / np.sqrt(3)).width == pytest.approx(np.sqrt(3))
    with pytest.raises(ValueError):
        width(unit_cube, [1.0, 1.0, 0])


def test_widths_vectorised(unit_cube):
    dirs = fibonacci_sphere(50)
    assert np.allclose(widths(unit_cube, dirs), [width(unit_cube, u).width for u in dirs])


def test_cube_binormals_are_main_diagonals(unit_cube):
    bins = enumerate_binormals(unit_cube)
    assert bins.kind_counts() == {VV: 4, VF: 0, EE: 0, VE: 0}
    for b in bins:
        assert np.allclose(np.abs(b.direction), 1 / np.sqrt(3))
        assert b.length == pytest.approx(np.sqrt(3))
    assert bins.dropped > 0


def test_regular_tetrahedron_binormals(tetra):
    bins = enumerate_binormals(tetra)
    assert bins.kind_counts() == {VV: 6, VF: 4, EE: 3, VE: 12}
    assert bins.euler_sum() == 1
    for b in bins.of_kind(VE):
        # vertex to the midpoint of an edge of the opposite face
        (_, v), p = b.start
        (_, e), q = b.end
        a, c = tetra.edges[e].vertices
        assert v not in (a, c)
        assert np.allclose(q, 0.5 * (tetra.vertices[a] + tetra.vertices[c]))
    for b in bins.of_kind(VV):
        assert width_local_type(tetra.vertices, b.direction) == "max"
    for b in bins.of_kind(VF) + bins.of_kind(EE):
        assert width_local_type(tetra.vertices, b.direction) == "min"


def _support_holds(P, b, eps=1e-9):
    s = P.vertices @ b.direction
    lo, hi = b.start[1] @ b.direction, b.end[1] @ b.direction
    return s.min() > lo - eps and s.max() < hi + eps


@settings(max_examples=40, deadline=None)
@given(st.integers(5, 16), st.integers(0, 10**6))
def test_binormal_invariants(n, seed):
    P = random_sphere_hull(n, seed=seed)
    bins = enumerate_binormals(P)
    assert bins.dropped == 0
    assert bins.euler_sum() == 1
    assert bins.of_kind(VE)
    for b in bins:
        assert b.length == pytest.approx(width(P, b.direction).width, abs=1e-9)
        assert _support_holds(P, b)
        chord = b.end[1] - b.start[1]
        assert np.allclose(chord / np.linalg.norm(chord), b.direction)


@pytest.mark.parametrize("seed", range(8))
def test_width_extrema_types(seed):
    P = random_sphere_hull(8 + seed, seed=(31, seed))
    bins = enumerate_binormals(P)
    for b in bins.of_kind(VV):
        assert width_local_type(P.vertices, b.direction, seed=seed) == "max"
    for b in bins.of_kind(VF) + bins.of_kind(EE):
        assert width_local_type(P.vertices, b.direction, seed=seed) == "min"


def test_global_extrema_are_binormals():
    P = random_sphere_hull(12, seed=2)
    bins = enumerate_binormals(P)
    dirs = fibonacci_sphere(20000)
    w = widths(P, dirs)
    # sampling never beats the true extrema; near minima the width has kinks, so allow 1%
    top = max(b.length for b in bins.of_kind(VV))
    low = min(b.length for b in bins.of_kind(VF) + bins.of_kind(EE))
    assert w.max() - 1e-12 <= top <= w.max() * 1.001
    assert w.min() * 0.99 <= low <= w.min() + 1e-12
