import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from higherindex import oracles
from higherindex.geom import Euclidean, HyperbolicPlane, volume_form
from higherindex.simplex import GeodesicSimplex, QuadratureRule, integrate_form, simplex_point, simplex_volume

H = HyperbolicPlane()
E2 = Euclidean(2)


def test_quadrature_weights_sum_to_simplex_volume():
    for k in range(1, 5):
        q = QuadratureRule(k, 6)
        assert np.isclose(q.weights.sum(), 1 / math.factorial(k))
        assert np.allclose(q.nodes.sum(axis=-1), 1.0)


def test_quadrature_is_exact_on_monomials():
    q = QuadratureRule(2, 6)
    # int over simplex of t1^a t2^b = a! b! / (a + b + 2)!
    for a, b in [(0, 0), (2, 1), (3, 3), (1, 5)]:
        exact = math.factorial(a) * math.factorial(b) / math.factorial(a + b + 2)
        assert np.isclose(q.integrate(lambda t: t[:, 1] ** a * t[:, 2] ** b), exact, rtol=1e-12)


def test_simplex_point_examples():
    s = GeodesicSimplex.from_points(E2, [[0, 0], [1, 0], [0, 1]])
    assert np.allclose(simplex_point(s, [1 / 3, 1 / 3, 1 / 3]), [1 / 3, 1 / 3])
    for i in range(3):
        t = np.eye(3)[i]
        assert np.allclose(simplex_point(s, t), s.points[i])
    g = H.random_element(np.random.default_rng(1), 2.0)
    seg = GeodesicSimplex(H, (H.identity(), g))
    mid = simplex_point(seg, [0.5, 0.5])
    assert np.isclose(mid, H.contraction(0.5, H.orbit_point(g)))


def test_euclidean_integrals():
    q = QuadratureRule(2, 1)
    vol = volume_form(E2)
    s = GeodesicSimplex.from_points(E2, [[0, 0], [2, 0], [0, 2]])
    assert np.isclose(integrate_form(vol, s, q), 2.0)
    assert np.isclose(simplex_volume(GeodesicSimplex.from_points(E2, [[0, 0], [1, 0], [0, 1]]), q), 0.5)
    assert abs(integrate_form(vol, GeodesicSimplex.from_points(E2, [[0, 0], [1, 1], [1, 1]]), q)) < 1e-15


def test_hyperbolic_examples():
    q = QuadratureRule(2, 120)
    vol = volume_form(H)
    tri = GeodesicSimplex.from_points(H, [1j, 1 + 1j, -1 + 1j])
    v = integrate_form(vol, tri, q)
    ref = oracles.gauss_bonnet_area(1j, 1 + 1j, -1 + 1j)
    assert 0 < abs(v) < math.pi and abs(v - ref) < 1e-6
    tri2 = GeodesicSimplex.from_points(H, [1j, 2j, 1 + 1j])
    assert abs(simplex_volume(tri2, q) - abs(oracles.gauss_bonnet_area(1j, 2j, 1 + 1j))) < 1e-6
    assert simplex_volume(GeodesicSimplex.from_points(H, [1j, 2j, 2j]), q) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=6, max_size=6))
def test_euclidean_area_matches_shoelace(c):
    p = np.array(c).reshape(3, 2)
    s = GeodesicSimplex.from_points(E2, p)
    assert np.isclose(integrate_form(volume_form(E2), s, QuadratureRule(2, 1)),
                      oracles.shoelace_area(*p), atol=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31), st.floats(0.1, 6.0))
def test_hyperbolic_area_matches_gauss_bonnet_and_is_translation_invariant(seed, radius):
    rng = np.random.default_rng(seed)
    gs = [H.random_element(rng, rng.uniform(0, radius)) for _ in range(3)]
    s = GeodesicSimplex(H, tuple(gs))
    q = QuadratureRule(2, 120)
    v = integrate_form(volume_form(H), s, q)
    assert abs(v - oracles.gauss_bonnet_area(*s.points)) < 1e-6
    h = H.random_element(rng, rng.uniform(0, 3))
    assert abs(integrate_form(volume_form(H), s.translate(h), q) - v) < 1e-6


def test_euclidean_higher_dimensional_volume_matches_gram():
    rng = np.random.default_rng(3)
    E3 = Euclidean(3)
    pts = rng.standard_normal((4, 3))
    s = GeodesicSimplex.from_points(E3, pts)
    q = QuadratureRule(3, 1)
    assert np.isclose(integrate_form(volume_form(E3), s, q), oracles.gram_volume(pts))
    assert np.isclose(simplex_volume(s, q), abs(oracles.gram_volume(pts)))


def test_bad_barycentric_coordinates():
    s = GeodesicSimplex.from_points(E2, [[0, 0], [1, 0], [0, 1]])
    with pytest.raises(ValueError):
        simplex_point(s, [0.5, 0.6, -0.1])
