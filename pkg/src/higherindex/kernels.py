"""Invariant smoothing kernels on M = G x S, tau^M_c, the partial trace and Morita.

An invariant kernel k((y, s), (y', s')) depends on y' - y only and is stored
as k~(g, s, s') = k((0, s), (g, s')) on the lattice box of a ``LatticeGroup``
times S x S.  Integration over M is the weighted sum over lattice sites
(weight h^n) and slice points (weights w(s)).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ._accel import njit, pick
from .conv import ConvElement, LatticeGroup
from .cyclic import (CyclicCochain, Idempotent, SampledAlgebra, algebra_matrix, chern_pairing,
                     lattice_cochain, LatticeAlgebra)
from .errors import BoxOverflowError, NotIdempotentError


@dataclass(frozen=True, eq=False)
class InvariantKernel:
    group: LatticeGroup
    weights: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        v = np.asarray(self.values)
        ns = len(w)
        if np.any(w <= 0) or ns == 0:
            raise ValueError("slice weights must be positive and nonempty")
        if v.shape != self.group.shape + (ns, ns):
            raise ValueError(f"kernel values must have shape {self.group.shape + (ns, ns)}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "values", v)

    @property
    def slice_size(self) -> int:
        return len(self.weights)

    def _check(self, other: "InvariantKernel"):
        if other.group != self.group or not np.array_equal(other.weights, self.weights):
            raise ValueError("kernels live on different discretizations")

    def __add__(self, other):
        self._check(other)
        return InvariantKernel(self.group, self.weights, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return InvariantKernel(self.group, self.weights, self.values - other.values)

    def __mul__(self, s):
        return InvariantKernel(self.group, self.weights, self.values * s)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return kernel_convolve(self, other)

    def support(self):
        """(offsets (N, n), blocks (N, S, S)) of lattice sites with a nonzero block."""
        nz = np.nonzero(np.any(self.values != 0, axis=(-1, -2)))
        off = np.stack(nz, axis=-1).astype(np.int64) - self.group.radius
        return off, self.values[nz]

    def support_box(self):
        off, _ = self.support()
        if len(off) == 0:
            return None
        return off.min(axis=0), off.max(axis=0)

    def at(self, offset) -> np.ndarray:
        idx = tuple(int(o) + self.group.radius for o in np.atleast_1d(offset))
        return self.values[idx]


def identity_kernel(group: LatticeGroup, weights) -> InvariantKernel:
    """delta_0 / h^n (x) delta_{ss'} / w(s)."""
    w = np.asarray(weights, dtype=float)
    v = np.zeros(group.shape + (len(w), len(w)))
    v[(group.radius,) * group.n] = np.diag(1.0 / w) / group.haar
    return InvariantKernel(group, w, v)


def simple_tensor(f: ConvElement, e: np.ndarray, weights) -> InvariantKernel:
    """(f (x) e)~(g, s, s') = f(g) e(s, s')."""
    e = np.asarray(e)
    return InvariantKernel(f.group, weights, f.values[..., None, None] * e)


def projection_kernel(P: np.ndarray, weights) -> np.ndarray:
    """S-kernel e(s, s') = P_ss' / sqrt(w_s w_s') of an orthogonal projection P on l^2(S).

    The operator (T_e phi)(s) = sum_s' e(s, s') phi(s') w(s') is then unitarily
    equivalent to P, so T_e is idempotent with trace rank P.
    """
    w = np.sqrt(np.asarray(weights, dtype=float))
    return np.asarray(P) / np.outer(w, w)


def random_projection(size: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    q, _ = np.linalg.qr(rng.standard_normal((size, size)))
    return q[:, :rank] @ q[:, :rank].T


# -- convolution -----------------------------------------------------------

@njit
def _kconv_numba(ia, ka, ib, kb, w, side, radius, periodic, out):
    n = ia.shape[1]
    ns = w.shape[0]
    for p in range(ia.shape[0]):
        for q in range(ib.shape[0]):
            idx = 0
            for d in range(n):
                o = ia[p, d] + ib[q, d]
                if periodic:
                    o = (o + radius) % side - radius
                idx = idx * side + (o + radius)
            for s in range(ns):
                for t in range(ns):
                    acc = out[idx, s, t] * 0.0
                    for u in range(ns):
                        acc += ka[p, s, u] * w[u] * kb[q, u, t]
                    out[idx, s, t] += acc
    return out


def _kconv_numpy(ia, ka, ib, kb, w, side, radius, periodic, out):
    n = ia.shape[1]
    ns = w.shape[0]
    grid = out.reshape((side,) * n + (ns, ns))
    if len(ia) <= len(ib):
        for p in range(len(ia)):
            off = ia[p] + ib
            if periodic:
                off = (off + radius) % side - radius
            np.add.at(grid, tuple((off + radius).T), np.einsum("su,u,qut->qst", ka[p], w, kb))
    else:
        for q in range(len(ib)):
            off = ia + ib[q]
            if periodic:
                off = (off + radius) % side - radius
            np.add.at(grid, tuple((off + radius).T), np.einsum("psu,u,ut->pst", ka, w, kb[q]))
    return out


def _kconv(backend=None):
    return pick(_kconv_numba, _kconv_numpy, backend)


def kernel_convolve(k1: InvariantKernel, k2: InvariantKernel, backend: Optional[str] = None) -> InvariantKernel:
    """(k * k')~(g, s, s'') = sum_{g', s'} k~(g', s, s') k'~(g - g', s', s'') h^n w(s')."""
    k1._check(k2)
    g = k1.group
    if not g.periodic:
        b1, b2 = k1.support_box(), k2.support_box()
        if b1 is not None and b2 is not None:
            lo, hi = b1[0] + b2[0], b1[1] + b2[1]
            if np.any(lo < -g.radius) or np.any(hi > g.radius):
                raise BoxOverflowError(f"kernel product support escapes the box of radius {g.radius}")
    ns = k1.slice_size
    dtype = np.result_type(k1.values, k2.values, np.float64)
    out = np.zeros((g.side ** g.n, ns, ns), dtype=dtype)
    ia, ka = k1.support()
    ib, kb = k2.support()
    if len(ia) and len(ib):
        _kconv(backend)(ia, ka.astype(dtype), ib, kb.astype(dtype), k1.weights.astype(dtype),
                        g.side, g.radius, g.periodic, out)
    return InvariantKernel(g, k1.weights, out.reshape(g.shape + (ns, ns)) * g.haar)


def partial_trace(k: InvariantKernel) -> ConvElement:
    """Tr_S(k~)(g) = sum_s k~(g, s, s) w(s)."""
    diag = np.diagonal(k.values, axis1=-2, axis2=-1)
    return ConvElement(k.group, np.sum(diag * k.weights, axis=-1))


def kernel_trace(k: InvariantKernel):
    """Invariant trace sum_s k~(0, s, s) w(s)."""
    v = k.at(np.zeros(k.group.n, dtype=int))
    t = np.sum(np.diagonal(v) * k.weights)
    return t.item() if np.iscomplexobj(t) else float(t)


class KernelAlgebra(SampledAlgebra):
    """Invariant kernels under kernel_convolve; unit is the identity kernel."""

    def __init__(self, group: LatticeGroup, weights, support_radius: int = 1):
        self.group = group
        self.weights = np.asarray(weights, dtype=float)
        self.support_radius = int(support_radius)
        self.name = f"kernels(R^{group.n} x S_{len(self.weights)})"

    def mul(self, a, b):
        return kernel_convolve(a, b)

    def add(self, a, b):
        return a + b

    def scale(self, a, s):
        return a * s

    def zero(self):
        ns = len(self.weights)
        return InvariantKernel(self.group, self.weights, np.zeros(self.group.shape + (ns, ns)))

    def unit(self):
        return identity_kernel(self.group, self.weights)

    def norm(self, a) -> float:
        """sum_g h^n ||W^1/2 k~(g) W^1/2||_2, the l^1 norm of the operator-valued symbol."""
        r = np.sqrt(self.weights)
        blocks = a.values * r[:, None] * r[None, :]
        flat = blocks.reshape(-1, len(r), len(r))
        nz = np.any(flat != 0, axis=(-1, -2))
        if not np.any(nz):
            return 0.0
        return float(np.sum(np.linalg.norm(flat[nz], 2, axis=(-2, -1))) * self.group.haar)

    def is_zero(self, a) -> bool:
        return not np.any(a.values)

    def random(self, rng):
        ns = len(self.weights)
        mask = np.all(np.abs(self.group.offsets) <= self.support_radius, axis=-1)
        v = rng.standard_normal(self.group.shape + (ns, ns)) * mask[..., None, None]
        return InvariantKernel(self.group, self.weights, v)

    def trace(self, a):
        return kernel_trace(a)


# -- tau^M_c ---------------------------------------------------------------

def _cutoff_weights(chi, group: LatticeGroup, weights):
    """Sites y and weights X[y, s] = chi(y, s) h^n w(s) over the lattice part of supp chi."""
    reach = min(int(np.ceil(chi.support_radius / group.spacing)), group.radius)
    ax = np.arange(-reach, reach + 1)
    off = np.stack([a.ravel() for a in np.meshgrid(*([ax] * group.n), indexing="ij")], axis=-1)
    ns = len(weights)
    X = np.stack([chi(off * group.spacing, np.full(len(off), s)) for s in range(ns)], axis=-1)
    X = X * group.haar * np.asarray(weights)[None, :]
    keep = np.any(X != 0, axis=-1)
    return off[keep], X[keep]


def _kernel_lookup(k: InvariantKernel, off: np.ndarray) -> np.ndarray:
    g = k.group
    off = g.wrap(off)
    inside = np.all(np.abs(off) <= g.radius, axis=-1)
    idx = np.where(inside[..., None], off + g.radius, 0)
    vals = k.values[tuple(np.moveaxis(idx, -1, 0))]
    return np.where(inside[..., None, None], vals, 0)


def tau_m(c, chi, *kernels: InvariantKernel, chunk: int = 1 << 16):
    """tau^M_c(k_0..k_k) on the lattice discretization of M.

    Integrates prod chi(x_i) k_0(x_0, g_1 x_1) k_1(x_1, g_2 x_2) .. k_k(x_k, (g_1..g_k)^-1 x_0)
    against c(e, g_1, g_1 g_2, ..) over x_i in M and g_i in G.  With the
    displacements d_i = y_i + g_i - y_{i-1} as summation variables the kernel
    product no longer sees the y_i, which enter only through the cochain:
    the cochain is evaluated at (0, E_1 - y_1 + y_0, .., E_k - y_k + y_0),
    E_i = d_1 + .. + d_i, so homogeneity of c is never assumed.

    When chi concentrates on the slice this collapses to
    tau^G_c(f_k, f_0, .., f_{k-1}) Tr(e_0 .. e_k) on simple tensors, i.e.
    (-1)^k tau^G_c(f_0..f_k) Tr(..) for cyclic c; the sign is +1 in the even
    degrees that pair with K-theory.
    """
    if len(kernels) != c.degree + 1:
        raise ValueError(f"tau_m of a {c.degree}-cochain takes {c.degree + 1} kernels")
    g = kernels[0].group
    w = kernels[0].weights
    for kk in kernels[1:]:
        kernels[0]._check(kk)
    k = c.degree
    ys, X = _cutoff_weights(chi, g, w)
    if len(ys) == 0:
        return 0.0
    if k == 0:
        diag = np.diagonal(kernels[0].at(np.zeros(g.n, dtype=int)))
        c0 = np.asarray(c(np.zeros((1, g.n))))[0]
        return c0 * np.sum(X * diag[None, :])
    supports = [kk.support() for kk in kernels[:k]]
    if any(len(o) == 0 for o, _ in supports) or not np.any(kernels[k].values):
        return 0.0
    sizes = [len(o) for o, _ in supports]
    S = len(w)
    chunk = max(1, min(chunk, (1 << 22) // (S ** (k + 1) + len(ys) ** (k + 1))))
    letters = "abcdefgh"
    total = 0.0
    # enumerate displacement tuples (d_1..d_k) in blocks
    for block in _product_blocks(sizes, chunk):
        E = np.zeros((len(block), g.n), dtype=np.int64)
        Es = []
        W = None
        for i in range(k):
            off, blocks = supports[i]
            E = E + off[block[:, i]]
            Es.append(E.copy())
            Bi = blocks[block[:, i]]  # (m, S, S) indexed (s_i, s_{i+1})
            if W is None:
                W = Bi
            else:
                # contract nothing: build (m, s_0, .., s_{i+1}) outer products along the chain
                W = np.einsum(f"m{letters[:i + 1]},m{letters[i]}{letters[i + 1]}->m{letters[:i + 2]}", W, Bi)
        last = _kernel_lookup(kernels[k], -E)  # (m, S, S) indexed (s_k, s_0)
        W = np.einsum(f"m{letters[:k + 1]},m{letters[k]}{letters[0]}->m{letters[:k + 1]}", W, last)
        if not np.any(W):
            continue
        # Z[m, y_0..y_k] = sum_s W[m, s_0..s_k] prod_i X[y_i, s_i]
        ops = [W, list(range(k + 2))]
        for i in range(k + 1):
            ops += [X, [k + 2 + i, i + 1]]
        Z = np.einsum(*ops, [0] + list(range(k + 2, 2 * k + 3)), optimize=True)
        live = np.nonzero(Z)
        if len(live[0]) == 0:
            continue
        mi, yi = live[0], live[1:]
        y0 = ys[yi[0]]
        args = [np.zeros((len(mi), g.n))]
        for i in range(k):
            args.append(g.wrap(Es[i][mi] - ys[yi[i + 1]] + y0) * g.spacing)
        total = total + np.sum(np.asarray(c(*args)) * Z[live])
    return total * g.haar ** k


def _product_blocks(sizes: Sequence[int], chunk: int):
    """Yield index blocks (m, len(sizes)) enumerating the Cartesian product."""
    total = int(np.prod(sizes))
    for start in range(0, total, chunk):
        flat = np.arange(start, min(total, start + chunk))
        yield np.stack(np.unravel_index(flat, sizes), axis=-1).astype(np.int64)


def kernel_cochain(c, chi, alg: KernelAlgebra) -> CyclicCochain:
    return CyclicCochain(c.degree, lambda *ks: tau_m(c, chi, *ks), alg, True, label=f"tau_M({c.label})")


# -- Morita ----------------------------------------------------------------

def morita_check(e1, e2: np.ndarray, c, chi, weights, tol: float = 1e-10):
    """(<[e1 (x) e2], tau^M_c>, <[Tr_S(e1 (x) e2)], tau^G_c>), computed independently.

    ``e1`` is an idempotent ConvElement or an ``Idempotent`` matrix with
    entries in the lattice algebra (no scalar part); ``e2`` an idempotent
    S-kernel.  The K-theory class of Tr_S(e1 (x) e2) is rank(e2) copies of
    [e1], so the right-hand side pairs diag(e1, .., e1) with tau^G_c.
    """
    weights = np.asarray(weights, dtype=float)
    if isinstance(e1, ConvElement):
        entries = [[e1]]
    else:
        if np.any(e1.matrix.scalar):
            raise ValueError("e1 must have no scalar part")
        entries = [list(row) for row in e1.matrix.entries]
    g = entries[0][0].group
    lalg = LatticeAlgebra(g)
    kalg = KernelAlgebra(g, weights)
    p1 = algebra_matrix(lalg, entries)
    t1 = _scaled_tol(p1, tol)
    Idempotent(p1, tol=t1)
    e2 = np.asarray(e2)
    if np.max(np.abs((e2 * weights[None, :]) @ e2 - e2)) > tol * max(1.0, np.max(np.abs(e2))):
        raise NotIdempotentError("e2 is not idempotent as an operator on L^2(S)")
    pk = algebra_matrix(kalg, [[simple_tensor(a, e2, weights) for a in row] for row in entries])
    lhs = chern_pairing(Idempotent(pk, tol=_scaled_tol(pk, tol)), Idempotent.zero(kalg, pk.size),
                        kernel_cochain(c, chi, kalg))
    rank = int(round(float(np.real(np.sum(np.diagonal(e2) * weights)))))
    rhs = 0.0
    if rank > 0:
        pr = p1
        for _ in range(rank - 1):
            pr = pr.direct_sum(p1)
        rhs = chern_pairing(Idempotent(pr, tol=_scaled_tol(pr, tol)), Idempotent.zero(lalg, pr.size),
                            lattice_cochain(c, lalg))
    return complex(lhs), complex(rhs)


def bundle_idempotent(group: LatticeGroup, rng: np.random.Generator, smooth: int = 2) -> Idempotent:
    """2 x 2 idempotent over the periodic lattice algebra with a rank-one projection symbol.

    The symbol is P(xi) = (1 + n(xi) . sigma) / 2 for a random unit vector field
    n on the dual torus (low-pass filtered ``smooth`` times), so the matrix
    idempotent is not similar to a constant one.
    """
    from .conv import from_symbol

    if not group.periodic:
        raise ValueError("bundle idempotents need a periodic lattice")
    field = rng.standard_normal((3,) + group.shape)
    for _ in range(smooth):
        for ax in range(1, group.n + 1):
            field = (np.roll(field, 1, axis=ax) + 2 * field + np.roll(field, -1, axis=ax)) / 4
    nvec = field / np.linalg.norm(field, axis=0)
    x, y, z = nvec
    sym = 0.5 * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]])
    lalg = LatticeAlgebra(group)
    entries = [[from_symbol(group, sym[i, j], real=False) for j in range(2)] for i in range(2)]
    m = algebra_matrix(lalg, entries)
    return Idempotent(m, tol=_scaled_tol(m, 1e-10))


def _scaled_tol(m, tol):
    return tol * max(1.0, m.norm() ** 2)


__all__ = [
    "InvariantKernel", "KernelAlgebra", "identity_kernel", "kernel_cochain", "kernel_convolve",
    "bundle_idempotent", "kernel_trace", "morita_check", "partial_trace", "projection_kernel", "random_projection",
    "simple_tensor", "tau_m",
]
