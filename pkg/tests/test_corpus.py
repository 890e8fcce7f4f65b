import numpy as np

from polynorm.corpus import polytope_corpus, random_spherical_polygon, skew_triangle
from polynorm.polytope import is_generic
from polynorm.spherical import triangle_criterion


def test_corpus_is_generic_and_reproducible():
    a = polytope_corpus(10, seed=3)
    b = polytope_corpus(10, seed=3)
    assert all(is_generic(P) for P in a)
    assert all(np.array_equal(p.vertices, q.vertices) for p, q in zip(a, b))
    assert {P.n_vertices for P in polytope_corpus(11, seed=0)} <= set(range(6, 17))


def test_random_polygon_convex():
    rng = np.random.default_rng(0)
    for _ in range(20):
        Q = random_spherical_polygon(rng)
        assert 3 <= Q.n <= 8
        assert np.all(Q.interior_angles() < np.pi)


def test_skew_triangle_labels():
    Q, labels = skew_triangle(np.random.default_rng(1))
    assert triangle_criterion(Q) == labels
