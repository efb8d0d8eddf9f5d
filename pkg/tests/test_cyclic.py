import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from higherindex import conv, cyclic, groupcoh
from higherindex.errors import NotIdempotentError
from higherindex.geom import Euclidean

M2 = cyclic.MatrixAlgebra(2)


def rand_args(alg, rng, n):
    return [alg.random(rng) for _ in range(n)]


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31), st.integers(1, 3))
def test_bicomplex_identities(seed, k):
    rng = np.random.default_rng(seed)
    tau = cyclic.random_reduced_cochain(M2, k, rng)
    b, B = cyclic.hochschild_b, cyclic.connes_B
    assert abs(b(b(tau))(*rand_args(M2, rng, k + 3))) < 1e-9
    if k >= 2:
        assert abs(B(B(tau))(*rand_args(M2, rng, k - 1))) < 1e-9
    args = rand_args(M2, rng, k + 1)
    assert abs(b(B(tau))(*args) + B(b(tau))(*args)) < 1e-9


def test_trace_is_a_hochschild_cocycle_and_reduced_B_vanishes():
    rng = np.random.default_rng(0)
    lat = cyclic.LatticeAlgebra(conv.LatticeGroup(1, 1.0, 6), 2)
    tr = cyclic.trace_cochain(lat)
    assert abs(cyclic.hochschild_b(tr)(*rand_args(lat, rng, 2))) < 1e-12
    mtr = cyclic.trace_cochain(M2)
    assert abs(cyclic.hochschild_b(mtr)(*rand_args(M2, rng, 2))) < 1e-12
    # a reduced cochain that is cyclic (tau^G of a cyclic cocycle) is killed by B
    g = conv.LatticeGroup(2, 0.5, 6)
    la = cyclic.LatticeAlgebra(g, 1)
    tau = cyclic.lattice_cochain(groupcoh.cyclic_symmetrize(groupcoh.area_cocycle(Euclidean(2))), la)
    assert abs(cyclic.connes_B(tau)(*rand_args(la, rng, 2))) < 1e-12


def test_tau_g_is_a_cyclic_cocycle():
    rng = np.random.default_rng(1)
    g = conv.LatticeGroup(2, 0.5, 8)
    la = cyclic.LatticeAlgebra(g, 2)
    tau = cyclic.lattice_cochain(groupcoh.cyclic_symmetrize(groupcoh.area_cocycle(Euclidean(2))), la)
    assert abs(cyclic.hochschild_b(tau)(*rand_args(la, rng, 4))) < 1e-8
    assert tau.cyclicity_defect(rng) < 1e-10
    assert tau.multilinearity_defect(rng) < 1e-10


def test_algebras_are_associative():
    rng = np.random.default_rng(2)
    assert M2.associativity_defect(rng) < 1e-12
    assert cyclic.LatticeAlgebra(conv.LatticeGroup(2, 0.5, 6), 1).associativity_defect(rng) < 1e-12


def test_rank_pairing_and_equal_idempotents():
    A1 = cyclic.MatrixAlgebra(1)
    entries = [[np.eye(1) if i == j and i < 2 else None for j in range(3)] for i in range(3)]
    p = cyclic.Idempotent(cyclic.algebra_matrix(A1, entries))
    tr = cyclic.trace_cochain(A1)
    assert np.isclose(cyclic.chern_pairing(p, cyclic.Idempotent.zero(A1, 3), tr), 2.0)
    assert cyclic.chern_pairing(p, p, tr) == 0.0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_degree_zero_pairings_are_integers_and_additive(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 5))
    alg = cyclic.MatrixAlgebra(d)
    tr = cyclic.trace_cochain(alg)

    def proj(r):
        q, _ = np.linalg.qr(rng.standard_normal((d, d)))
        return cyclic.Idempotent(cyclic.algebra_matrix(alg, [[q[:, :r] @ q[:, :r].T]]))

    r1, r2 = int(rng.integers(0, d + 1)), int(rng.integers(0, d + 1))
    p1, p2 = proj(r1), proj(r2)
    v1 = cyclic.chern_pairing(p1, cyclic.Idempotent.zero(alg, 1), tr)
    v12 = cyclic.chern_pairing(p1.direct_sum(p2), cyclic.Idempotent.zero(alg, 2), tr)
    assert abs(v1 - r1) < 1e-9
    assert abs(v12 - (r1 + r2)) < 1e-9


def test_homotopy_invariance_along_paths():
    rng = np.random.default_rng(3)
    g = conv.LatticeGroup(2, 0.5, 8)
    la = cyclic.LatticeAlgebra(g, 1)
    tau = cyclic.lattice_cochain(groupcoh.cyclic_symmetrize(groupcoh.area_cocycle(Euclidean(2))), la)
    one = cyclic.scalar_matrix(la, np.eye(2))
    Y = cyclic.algebra_matrix(la, [[None, None], [la.random(rng), None]])
    X = cyclic.algebra_matrix(la, [[None, la.random(rng)], [None, None]])
    base = cyclic.Idempotent((one + Y) @ cyclic.scalar_matrix(la, np.diag([1.0, 0.0])) @ (one - Y))
    path = cyclic.idempotent_from_projection_path("conjugation", la, 20, base=base, nilpotent=X)
    assert len(path) == 21
    _, drift = cyclic.pairing_drift(path, tau)
    assert drift < 1e-6
    rot = cyclic.idempotent_from_projection_path("rotation", M2, 20)
    _, drift = cyclic.pairing_drift(rot, cyclic.trace_cochain(M2))
    assert drift == 0.0


def test_newton_idempotent():
    rng = np.random.default_rng(4)
    alg = cyclic.MatrixAlgebra(3)
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    P = q[:, :1] @ q[:, :1].T
    m = cyclic.algebra_matrix(alg, [[P + 0.02 * rng.standard_normal((3, 3))]])
    p = cyclic.Idempotent(cyclic.newton_idempotent(m))
    assert np.isclose(cyclic.chern_pairing(p, cyclic.Idempotent.zero(alg, 1), cyclic.trace_cochain(alg)), 1.0)
    with pytest.raises(NotIdempotentError):
        cyclic.newton_idempotent(cyclic.algebra_matrix(alg, [[0.5 * np.eye(3)]]))
    with pytest.raises(NotIdempotentError):
        cyclic.Idempotent(cyclic.algebra_matrix(alg, [[2 * np.eye(3)]]))


def test_pairing_needs_even_degree():
    rng = np.random.default_rng(5)
    tau = cyclic.random_reduced_cochain(M2, 1, rng)
    z = cyclic.Idempotent.zero(M2, 1)
    with pytest.raises(ValueError):
        cyclic.chern_pairing(z, z, tau)


def test_degree_two_coefficient():
    # <[p], tau> = (-1)^m (2m)!/m! tau(p, p, p) = -2 tau(p, p, p) for m = 1
    rng = np.random.default_rng(6)
    tau = cyclic.random_reduced_cochain(M2, 2, rng)
    q, _ = np.linalg.qr(rng.standard_normal((2, 2)))
    P = np.outer(q[:, 0], q[:, 0])
    p = cyclic.Idempotent(cyclic.algebra_matrix(M2, [[P]]))
    assert np.isclose(cyclic.generalized_trace(tau, [p.matrix] * 3), tau(P, P, P))
    val = cyclic.chern_pairing(p, cyclic.Idempotent.zero(M2, 1), tau)
    assert np.isclose(val, -2.0 * tau(P, P, P))
