import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from higherindex import HAVE_NUMBA, conv, cyclic, groupcoh, kernels, proper
from higherindex.errors import BoxOverflowError, NotIdempotentError
from higherindex.geom import Euclidean

BACKENDS = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
AREA_SYM = groupcoh.cyclic_symmetrize(groupcoh.area_cocycle(Euclidean(2)))
CONST = groupcoh.constant_cochain(Euclidean(2))


def setup(seed=0, S=3, radius=5, periodic=False, h=0.5):
    rng = np.random.default_rng(seed)
    g = conv.LatticeGroup(2, h, radius, periodic=periodic)
    w = rng.uniform(0.5, 1.5, S)
    return rng, g, w, kernels.KernelAlgebra(g, w, 1)


def lattice_chi(g, w, eps):
    return proper.cutoff_family(eps, proper.ProperActionData(2, w, g.spacing), normalizer="lattice")


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31), st.booleans())
def test_kernel_algebra_associative_with_unit(seed, periodic):
    rng, g, w, alg = setup(seed, periodic=periodic)
    a, b, c = alg.random(rng), alg.random(rng), alg.random(rng)
    for be in BACKENDS:
        lhs = kernels.kernel_convolve(kernels.kernel_convolve(a, b, be), c, be).values
        rhs = kernels.kernel_convolve(a, kernels.kernel_convolve(b, c, be), be).values
        assert np.max(np.abs(lhs - rhs)) < 1e-12 * (1 + np.max(np.abs(lhs)))
    unit = alg.unit()
    assert np.allclose((a @ unit).values, a.values, atol=1e-13)
    assert np.allclose((unit @ a).values, a.values, atol=1e-13)
    if len(BACKENDS) == 2:
        assert np.allclose(kernels.kernel_convolve(a, b, "numba").values,
                           kernels.kernel_convolve(a, b, "numpy").values, atol=1e-13)


def test_kernel_box_overflow():
    g = conv.LatticeGroup(1, 1.0, 2)
    k = kernels.simple_tensor(g.delta(2), np.eye(1), [1.0])
    with pytest.raises(BoxOverflowError):
        kernels.kernel_convolve(k, k)


def test_partial_trace_examples():
    rng, g, w, alg = setup(1)
    f = conv.ConvElement(g, rng.standard_normal(g.shape))
    e = rng.standard_normal((3, 3))
    pt = kernels.partial_trace(kernels.simple_tensor(f, e, w))
    assert np.allclose(pt.values, f.values * np.sum(np.diag(e) * w))
    ident = kernels.partial_trace(kernels.identity_kernel(g, w))
    assert np.allclose(ident.values, g.unit().values * 3)


def test_partial_trace_is_a_trace():
    rng, g, w, alg = setup(2)
    a, b = alg.random(rng), alg.random(rng)
    lhs = conv.plancherel_trace(kernels.partial_trace(a @ b))
    rhs = conv.plancherel_trace(kernels.partial_trace(b @ a))
    assert abs(lhs - rhs) < 1e-12


def test_tau_m_degree_zero_is_invariant_trace():
    rng, g, w, alg = setup(3)
    k = alg.random(rng)
    chi = lattice_chi(g, w, 0.7)
    assert np.isclose(kernels.tau_m(CONST, chi, k), kernels.kernel_trace(k))
    assert kernels.tau_m(AREA_SYM, chi, alg.zero(), alg.random(rng), alg.random(rng)) == 0.0


def test_tau_m_on_simple_tensors_factorizes():
    rng, g, w, alg = setup(4, radius=4)
    chi = lattice_chi(g, w, 0.8)
    fs = [conv.ConvElement(g, rng.standard_normal(g.shape) * (np.abs(g.offsets) <= 1).all(-1)) for _ in range(3)]
    es = [rng.standard_normal((3, 3)) for _ in range(3)]
    ks = [kernels.simple_tensor(f, e, w) for f, e in zip(fs, es)]
    W = np.diag(w)
    tr = np.trace(es[0] @ W @ es[1] @ W @ es[2] @ W)
    lhs = kernels.tau_m(AREA_SYM, chi, *ks)
    rhs = conv.tau_g(AREA_SYM, *fs) * tr
    assert abs(lhs - rhs) < 1e-10 * (1 + abs(rhs))


def test_tau_m_cocycle_properties_and_cutoff_independence():
    rng, g, w, alg = setup(5, S=2, radius=4)
    chi1, chi2 = lattice_chi(g, w, 0.3), lattice_chi(g, w, 1.2)
    tau1 = kernels.kernel_cochain(AREA_SYM, chi1, alg)
    tau2 = kernels.kernel_cochain(AREA_SYM, chi2, alg)
    assert tau1.cyclicity_defect(rng, 2) < 1e-10
    args = [alg.random(rng) for _ in range(3)]
    assert abs(tau1(*args) - tau2(*args)) < 1e-10
    assert abs(cyclic.hochschild_b(tau1)(*[alg.random(rng) for _ in range(4)])) < 1e-8


def test_morita_examples():
    rng = np.random.default_rng(6)
    g = conv.LatticeGroup(2, 0.5, 2, periodic=True)
    w = np.array([0.6, 1.4])
    chi = lattice_chi(g, w, 0.4)
    e1 = kernels.bundle_idempotent(g, rng)
    # e2 of S-trace 1
    e2 = kernels.projection_kernel(kernels.random_projection(2, 1, rng), w)
    lhs, rhs = kernels.morita_check(e1, e2, AREA_SYM, chi, w)
    assert abs(lhs - rhs) < 1e-8 and abs(rhs) > 1e-6
    e2full = kernels.projection_kernel(np.eye(2), w)
    lhs2, rhs2 = kernels.morita_check(e1, e2full, AREA_SYM, chi, w)
    assert abs(lhs2 - rhs2) < 1e-8 and abs(rhs2 - 2 * rhs) < 1e-8
    zero = conv.ConvElement(g, np.zeros(g.shape))
    assert kernels.morita_check(zero, e2, AREA_SYM, chi, w) == (0j, 0j)
    sym = (rng.uniform(size=g.shape) < 0.5).astype(float)
    lhs0, rhs0 = kernels.morita_check(conv.from_symbol(g, sym, real=False), e2full, CONST, chi, w)
    # degree 0: twice the von Neumann dimension of the Fourier multiplier
    assert abs(lhs0 - rhs0) < 1e-8
    assert abs(rhs0 - 2 * sym.sum() / (g.side ** 2 * g.haar)) < 1e-10


def test_morita_rejects_non_idempotents():
    rng = np.random.default_rng(7)
    g = conv.LatticeGroup(2, 0.5, 2, periodic=True)
    w = np.ones(2)
    chi = lattice_chi(g, w, 0.4)
    with pytest.raises(NotIdempotentError):
        kernels.morita_check(g.unit() * 0.5, np.eye(2), CONST, chi, w)
    with pytest.raises(NotIdempotentError):
        kernels.morita_check(g.unit(), 2 * np.eye(2), CONST, chi, w)
