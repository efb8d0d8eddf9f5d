import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from higherindex import index, proper
from higherindex.errors import DegreeMismatchError

CHI = proper.cutoff_family(0.7, proper.ProperActionData.point_slice(2))


Y2 = (np.zeros((1, 2)), np.zeros(1, int))
Y4 = (np.zeros((1, 4)), np.zeros(1, int))


def test_form_algebra():
    y = (np.zeros((1, 3)), np.zeros(1, int))
    dx, dy, dz = (index.Form.basis(3, (i,)) for i in range(3))
    assert np.all(dx.wedge(dx).coefficient((0, 0), *y) == 0)
    assert dx.wedge(dy).coefficient((0, 1), *y) == 1.0
    assert dy.wedge(dx).coefficient((0, 1), *y) == -1.0
    assert dx.wedge(dy).coefficient((1, 0), *y) == -1.0
    assert dx.wedge(dy).wedge(dz).top(*y) == 1.0
    assert dz.wedge(dy).wedge(dx).top(*y) == -1.0


def test_flat_characteristic_forms():
    flat = index.CurvatureData.flat(4, rank=3)
    assert index.a_hat_form(flat).degree0() == 1.0
    assert index.l_form(flat).degree0() == 1.0
    assert index.chern_character(flat).degree0() == 3.0
    assert np.all(index.pontryagin1(flat).top(*Y4) == 0)


@pytest.mark.parametrize("B", [0.5, 1.0, 2 * math.pi, 10.0])
def test_magnetic_chern_character_and_index(B):
    data = index.CurvatureData.magnetic(B)
    ch = index.chern_character(data)
    top = ch.piece(2).top(*Y2)
    assert np.isclose(top, B / (2 * math.pi))
    AS = index.atiyah_singer_form(data)
    assert abs(index.higher_index_rhs(AS, CHI, index.Form.scalar(2, 1.0)) - B / (2 * math.pi)) < 1e-6


def test_flat_area_class_and_zero_form():
    AS = index.atiyah_singer_form(index.CurvatureData.flat(2))
    assert abs(index.higher_index_rhs(AS, CHI, index.Form.volume(2)) - 1.0) < 1e-6
    assert index.higher_index_rhs(AS, CHI, index.Form.scalar(2, 0.0)) == 0.0
    L = index.l_form(index.CurvatureData.flat(2))
    assert abs(index.higher_signature(L, CHI, index.Form.volume(2)) - 1.0) < 1e-6


@settings(max_examples=15, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.3, 1.2))
def test_exact_forms_integrate_to_zero(a, b, eps):
    chi = proper.cutoff_family(eps, proper.ProperActionData.point_slice(2))
    beta = index.Form.basis(2, (0,), a) + index.Form.basis(2, (1,), b)
    for data in (index.CurvatureData.flat(2), index.CurvatureData.magnetic(1.5)):
        AS = index.atiyah_singer_form(data)
        assert abs(index.higher_index_rhs(AS, chi, index.exterior_derivative(beta))) < 1e-6


@settings(max_examples=10, deadline=None)
@given(st.floats(0.3, 1.5), st.floats(0.3, 1.5))
def test_rhs_is_cutoff_independent(e1, e2):
    AS = index.atiyah_singer_form(index.CurvatureData.magnetic(3.0))
    vals = [index.higher_index_rhs(AS, proper.cutoff_family(e, proper.ProperActionData.point_slice(2)),
                                   index.Form.scalar(2, 1.0)) for e in (e1, e2)]
    assert abs(vals[0] - vals[1]) < 1e-6


def test_pontryagin_against_closed_form():
    rng = np.random.default_rng(0)

    def so4():
        a = rng.standard_normal((4, 4))
        return a - a.T

    R = {ij: so4() for ij in [(0, 1), (2, 3), (0, 2), (1, 3), (0, 3), (1, 2)]}
    data = index.CurvatureData.constant_curvature(4, riemann=R)
    p1 = float(index.pontryagin1(data).top(*Y4)[0])
    # -(1/8 pi^2) tr(R ^ R) expanded over the three pairings of {0,1,2,3}
    expected = -(2 * np.trace(R[0, 1] @ R[2, 3]) - 2 * np.trace(R[0, 2] @ R[1, 3])
                 + 2 * np.trace(R[0, 3] @ R[1, 2])) / (8 * math.pi ** 2)
    assert np.isclose(p1, expected, rtol=1e-12)
    assert np.isclose(float(index.a_hat_form(data).piece(4).top(*Y4)[0]), -p1 / 24)
    assert np.isclose(float(index.l_form(data).piece(4).top(*Y4)[0]), p1 / 3)
    chi4 = proper.cutoff_family(0.8, proper.ProperActionData.point_slice(4), points_per_axis=31)
    val = index.higher_a_hat(index.a_hat_form(data), chi4, index.Form.scalar(4, 1.0))
    assert abs(val + p1 / 24) < 1e-6


def test_curvature_data_symmetries():
    rng = np.random.default_rng(1)
    data = index.CurvatureData.magnetic(2.0)
    assert data.symmetry_defect(rng) < 1e-14
    assert data.invariance_defect(rng) < 1e-14


def test_degree_mismatch():
    AS = index.a_hat_form(index.CurvatureData.flat(2))
    with pytest.raises(DegreeMismatchError):
        index.higher_index_rhs(AS, CHI, index.Form.basis(2, (0,)))
