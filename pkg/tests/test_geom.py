import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from higherindex.errors import HyperbolicDomainError
from higherindex.geom import Euclidean, HyperbolicPlane, alternation_defect, invariance_defect, volume_form

H = HyperbolicPlane()
E2 = Euclidean(2)


def test_euclidean_act():
    assert np.allclose(E2.act([1, 2], [3, 4]), [4, 6])


def test_mobius_examples():
    assert np.isclose(H.act([[1, 1], [0, 1]], 1j), 1 + 1j)
    assert np.isclose(H.act([[0, -1], [1, 0]], 2j), 0.5j)


def test_distances():
    assert np.isclose(E2.distance([0, 0], [3, 4]), 5.0)
    assert np.isclose(H.distance(1j, 2j), math.log(2.0))
    assert np.isclose(H.distance(1j, 2j), math.acosh(1.25))
    assert H.distance(0.3 + 2j, 0.3 + 2j) == 0.0


def test_contraction():
    assert np.allclose(E2.contraction(0.5, [4.0, 0.0]), [2.0, 0.0])
    assert np.isclose(H.contraction(0.5, 4j), 2j)
    assert np.isclose(H.contraction(0.0, 0.7 + 3j), 1j)
    assert np.allclose(E2.contraction(0.0, [5.0, -1.0]), [0.0, 0.0])


def test_log_base():
    assert np.allclose(E2.log_base([3, 4]), [3, 4])
    v = H.log_base(math.e * 1j)
    assert np.isclose(abs(v), 1.0) and np.isclose(v, 1j)
    assert H.log_base(1j) == 0


def test_domain_errors():
    with pytest.raises(HyperbolicDomainError):
        H.point(-1j)
    with pytest.raises(HyperbolicDomainError):
        H.element([[2.0, 0.0], [0.0, 1.0]])


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 6.0), st.floats(0.0, 6.0), st.floats(0.0, 6.0), st.integers(0, 2 ** 31))
def test_hyperbolic_isometry(r1, r2, r3, seed):
    rng = np.random.default_rng(seed)
    g = H.random_element(rng, r1)
    x = H.orbit_point(H.random_element(rng, r2))
    y = H.orbit_point(H.random_element(rng, r3))
    d = H.distance(x, y)
    assert np.isclose(H.distance(H.act(g, x), H.act(g, y)), d, rtol=1e-8, atol=1e-8)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 5.0), st.floats(0.0, 1.0), st.integers(0, 2 ** 31))
def test_contraction_scales_distance(r, s, seed):
    rng = np.random.default_rng(seed)
    x = H.orbit_point(H.random_element(rng, r))
    assert np.isclose(H.distance(1j, H.contraction(s, x)), s * r, atol=1e-8)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 4.0), st.floats(0.0, 1.0), st.integers(0, 2 ** 31))
def test_geodesic_jet_matches_finite_differences(r, u, seed):
    rng = np.random.default_rng(seed)
    x = H.orbit_point(H.random_element(rng, rng.uniform(0, 2)))
    y = H.act(H.element_from_point(x), H.orbit_point(H.random_element(rng, r)))
    w = complex(*rng.standard_normal(2))
    p, du, (dw,) = H.geodesic_jet(x, y, u, [w])
    eps = 1e-6
    fd_u = (H.geodesic_point(x, y, min(u + eps, 1.0)) - H.geodesic_point(x, y, max(u - eps, 0.0))) / (
        min(u + eps, 1.0) - max(u - eps, 0.0))
    fd_w = (H.geodesic_point(x, y + eps * w, u) - H.geodesic_point(x, y - eps * w, u)) / (2 * eps)
    scale = 1 + abs(du) + abs(dw)
    assert abs(du - fd_u) < 1e-4 * scale
    assert abs(dw - fd_w) < 1e-4 * scale


def test_volume_form_is_invariant_and_alternating(model, rng):
    vol = volume_form(model)
    assert invariance_defect(vol, rng) < 1e-10
    assert alternation_defect(vol, rng) < 1e-12
