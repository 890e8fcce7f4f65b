import numpy as np
import pytest

from polynorm.binormal import VE, VV, enumerate_binormals
from polynorm.errors import GenericityError, PreconditionError
from polynorm.normals import count_normals, sheet_clearance
from polynorm.oracle import grid_inball
from polynorm.polytope import cube, random_sphere_hull
from polynorm.search import (BASELINE, binormal_case, chebyshev_center, find_high_normal_point,
                             polish_witness, trace_binormal, trace_nice_ray)
from polynorm.spherical import classify_skew, vertex_figure


def _vertex_verdicts(P):
    return [classify_skew(vertex_figure(P, v)).is_nice for v in range(P.n_vertices)]


def _assert_cells_constant(P, rep):
    for (lo, hi, c), nxt in zip(rep.cells, rep.cells[1:]):
        assert nxt[0] == pytest.approx(hi)
    for lo, hi, c in rep.cells:
        assert c.total == 2 + 2 * c.n_saddle


def test_chebyshev_cube(unit_cube):
    c, r = chebyshev_center(unit_cube)
    assert np.allclose(c, 0.5) and r == pytest.approx(0.5)


def test_chebyshev_tetrahedron(tetra):
    c, r = chebyshev_center(tetra)
    assert np.allclose(c, tetra.centroid, atol=1e-12)
    assert r == pytest.approx(1 / np.sqrt(24))


@pytest.mark.parametrize("seed", range(4))
def test_chebyshev_matches_grid(seed):
    P = random_sphere_hull(8 + seed, seed=(41, seed))
    c, r = chebyshev_center(P)
    _, gr = grid_inball(P, levels=9)
    assert abs(r - gr) <= 10 * P.tol.eps_len


def test_chebyshev_baseline(small_corpus):
    for P in small_corpus:
        c, _ = chebyshev_center(P)
        count = count_normals(P, c)
        assert count.total >= BASELINE and count.n_min >= 4


def _nice_instances(limit):
    out = []
    for seed in range(40):
        P = random_sphere_hull(6 + seed % 8, seed=(51, seed))
        nice = [v for v, ok in enumerate(_vertex_verdicts(P)) if ok]
        if nice:
            out.append((P, nice[0]))
        if len(out) >= limit:
            break
    return out


@pytest.mark.parametrize("case", range(4))
def test_nice_ray_reaches_ten(case):
    P, v = _nice_instances(4)[case]
    rep = trace_nice_ray(P, v)
    assert rep.best_count.total >= 10
    assert count_normals(P, rep.best_point) == rep.best_count
    assert rep.outcome in ("ten-by-birth", "ten-at-start", "ten-at-exit")
    _assert_cells_constant(P, rep)


def test_nice_ray_rejects_skew_vertex():
    for seed in range(40):
        P = random_sphere_hull(6 + seed % 8, seed=(51, seed))
        skew = [v for v, ok in enumerate(_vertex_verdicts(P)) if not ok]
        if skew:
            with pytest.raises(PreconditionError):
                trace_nice_ray(P, skew[0])
            return
    pytest.fail("no skew vertex in the sample")


@pytest.mark.parametrize("seed", range(6))
def test_tetrahedron_binormal_walk(seed):
    P = random_sphere_hull(4, seed=(61, seed))
    bins = enumerate_binormals(P).of_kind(VE)
    assert bins
    rep = trace_binormal(P, bins[0], seed=seed)
    assert rep.best_count.total >= 10
    assert count_normals(P, rep.best_point) == rep.best_count
    assert rep.case == binormal_case(P, bins[0])
    _assert_cells_constant(P, rep)


def test_binormal_walk_in_a_face_uses_circuit():
    P = random_sphere_hull(4, seed=(43, 0))
    b = next(b for b in enumerate_binormals(P).of_kind(VE) if binormal_case(P, b) == 2)
    rep = trace_binormal(P, b)
    assert rep.case == 2
    assert rep.best_count.total >= 10
    assert rep.circuit is not None
    lo, hi = rep.circuit.per_component[0]
    assert lo >= 3 and hi >= 3


def test_binormal_walk_needs_vertex_edge():
    P = random_sphere_hull(8, seed=3)
    b = enumerate_binormals(P).of_kind(VV)[0]
    with pytest.raises(PreconditionError):
        trace_binormal(P, b)


def test_target_eight_is_chebyshev():
    P = random_sphere_hull(10, seed=9)
    res = find_high_normal_point(P, target=8)
    assert res.success and res.strategy == "chebyshev" and res.count.total >= 8


@pytest.mark.parametrize("strategy", ["nice-ray", "binormal-walk", "cell-sampling"])
def test_each_strategy_alone(strategy):
    hits = 0
    for seed in range(6):
        P = random_sphere_hull(4 + seed, seed=(71, seed))
        res = find_high_normal_point(P, target=10, seed=seed, strategies=(strategy,))
        if res.success:
            hits += 1
            assert res.count == count_normals(P, res.witness)
            assert res.strategy in (strategy, "chebyshev")
    assert hits >= 4


def test_cube_auto_perturbed():
    res = find_high_normal_point(cube(), seed=1)
    assert res.perturbed and res.success and res.count.total >= 10
    with pytest.raises(GenericityError):
        find_high_normal_point(cube(), auto_perturb=False)


def test_unknown_strategy():
    with pytest.raises(ValueError):
        find_high_normal_point(random_sphere_hull(6, seed=0), strategies=("magic",))


def test_polish_keeps_count_and_increases_clearance():
    P = random_sphere_hull(10, seed=12)
    rng = np.random.default_rng(0)
    y = rng.dirichlet(np.ones(P.n_vertices)) @ P.vertices
    c0 = count_normals(P, y)
    y2, c2 = polish_witness(P, y, need=c0.total)
    assert c2.total >= c0.total
    assert sheet_clearance(P, y2) >= sheet_clearance(P, y)


def test_search_is_deterministic():
    P = random_sphere_hull(4, seed=(61, 2))
    a = find_high_normal_point(P, seed=3)
    b = find_high_normal_point(P, seed=3)
    assert np.array_equal(a.witness, b.witness) and a.count == b.count


def test_binormal_walk_reaches_ten_on_general_hulls():
    # random hulls almost always have a nice vertex, so the walk is run regardless
    for seed in range(4):
        P = random_sphere_hull(7 + seed, seed=(81, seed))
        bins = enumerate_binormals(P).of_kind(VE)
        assert bins
        best = max(trace_binormal(P, b, seed=seed).best_count.total for b in bins)
        assert best >= 10
