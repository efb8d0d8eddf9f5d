"""Hochschild b, Connes B, idempotents over the unitization, and the Chern pairing.

Algebras are accessed through a small adapter interface (``SampledAlgebra``)
so the same machinery runs on dense matrices, the lattice convolution algebra
and the invariant kernel algebra.  Cochains on a non-unital A are extended to
the unitization A~ = A + C as reduced cochains: only the algebra parts of the
arguments are seen, so an adjoined unit in any slot gives zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from .errors import NotIdempotentError

IDEMPOTENT_TOL = 1e-10


class SampledAlgebra:
    """Adapter interface; subclasses supply the algebra operations."""

    name = "algebra"

    def mul(self, a, b):
        raise NotImplementedError

    def add(self, a, b):
        raise NotImplementedError

    def scale(self, a, s):
        raise NotImplementedError

    def zero(self):
        raise NotImplementedError

    def unit(self):
        """The algebra's own unit (raises for non-unital algebras)."""
        raise NotImplementedError

    def norm(self, a) -> float:
        """A submultiplicative norm."""
        raise NotImplementedError

    def random(self, rng: np.random.Generator):
        raise NotImplementedError

    def sub(self, a, b):
        return self.add(a, self.scale(b, -1.0))

    def is_zero(self, a) -> bool:
        return self.norm(a) == 0.0

    def associativity_defect(self, rng: np.random.Generator, samples: int = 5) -> float:
        worst = 0.0
        for _ in range(samples):
            a, b, c = self.random(rng), self.random(rng), self.random(rng)
            d = self.sub(self.mul(self.mul(a, b), c), self.mul(a, self.mul(b, c)))
            worst = max(worst, self.norm(d))
        return worst


class MatrixAlgebra(SampledAlgebra):
    """Dense d x d matrices with the operator 2-norm."""

    def __init__(self, d: int, dtype=float):
        self.d = int(d)
        self.dtype = dtype
        self.name = f"M_{d}"

    def mul(self, a, b):
        return a @ b

    def add(self, a, b):
        return a + b

    def scale(self, a, s):
        return a * s

    def zero(self):
        return np.zeros((self.d, self.d), dtype=self.dtype)

    def unit(self):
        return np.eye(self.d, dtype=self.dtype)

    def norm(self, a) -> float:
        return float(np.linalg.norm(a, 2)) if a.size else 0.0

    def is_zero(self, a) -> bool:
        return not np.any(a)

    def random(self, rng):
        return rng.standard_normal((self.d, self.d)).astype(self.dtype)

    def trace(self, a):
        return np.trace(a)


class LatticeAlgebra(SampledAlgebra):
    """The lattice convolution algebra with unit delta_0 / h^n and the l^1 norm."""

    def __init__(self, group, support_radius: int = 2):
        self.group = group
        self.support_radius = int(support_radius)
        self.name = f"conv(R^{group.n})"

    def mul(self, a, b):
        from .conv import convolve
        return convolve(a, b)

    def add(self, a, b):
        return a + b

    def scale(self, a, s):
        return a * s

    def zero(self):
        return self.group.zeros()

    def unit(self):
        return self.group.unit()

    def norm(self, a) -> float:
        return float(np.sum(np.abs(a.values)) * self.group.haar)

    def is_zero(self, a) -> bool:
        return not np.any(a.values)

    def random(self, rng):
        from .conv import ConvElement
        mask = np.all(np.abs(self.group.offsets) <= self.support_radius, axis=-1)
        return ConvElement(self.group, rng.standard_normal(self.group.shape) * mask)

    def trace(self, a):
        from .conv import plancherel_trace
        return plancherel_trace(a)


# -- cochains --------------------------------------------------------------

@dataclass(frozen=True)
class CyclicCochain:
    degree: int
    evaluator: Callable
    algebra: SampledAlgebra
    reduced: bool = True
    label: str = field(default="", compare=False)

    def __call__(self, *args):
        if len(args) != self.degree + 1:
            raise ValueError(f"degree-{self.degree} cochain takes {self.degree + 1} arguments")
        return self.evaluator(*args)

    def rotated(self, args: Sequence):
        """tau(a_k, a_0, .., a_{k-1})."""
        args = list(args)
        return self(*([args[-1]] + args[:-1]))

    def cyclicity_defect(self, rng: np.random.Generator, samples: int = 5) -> float:
        worst = 0.0
        sign = (-1) ** self.degree
        for _ in range(samples):
            args = [self.algebra.random(rng) for _ in range(self.degree + 1)]
            a, b = self(*args), self.rotated(args)
            worst = max(worst, abs(b - sign * a) / max(1.0, abs(a)))
        return worst

    def multilinearity_defect(self, rng: np.random.Generator, samples: int = 3) -> float:
        alg = self.algebra
        worst = 0.0
        for _ in range(samples):
            args = [alg.random(rng) for _ in range(self.degree + 1)]
            slot = int(rng.integers(self.degree + 1))
            x, s = alg.random(rng), float(rng.standard_normal())
            mixed = list(args)
            mixed[slot] = alg.add(args[slot], alg.scale(x, s))
            other = list(args)
            other[slot] = x
            lhs = self(*mixed)
            rhs = self(*args) + s * self(*other)
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
        return worst


def hochschild_b(tau: CyclicCochain) -> CyclicCochain:
    """b tau(a_0..a_{k+1}) = sum_i (-1)^i tau(.., a_i a_{i+1}, ..) + (-1)^{k+1} tau(a_{k+1} a_0, a_1..a_k)."""
    k = tau.degree
    alg = tau.algebra

    def ev(*a):
        total = 0.0
        for i in range(k + 1):
            args = list(a[:i]) + [alg.mul(a[i], a[i + 1])] + list(a[i + 2:])
            total = total + (-1) ** i * tau(*args)
        args = [alg.mul(a[k + 1], a[0])] + list(a[1:k + 1])
        return total + (-1) ** (k + 1) * tau(*args)
    return CyclicCochain(k + 1, ev, alg, tau.reduced, label=f"b({tau.label})")


def connes_B(tau: CyclicCochain) -> CyclicCochain:
    """B tau(a_0..a_{k-1}) = sum_i (-1)^{(k-1)i} tau(1, a_i, .., a_{k-1}, a_0, .., a_{i-1})."""
    k = tau.degree
    if k < 1:
        raise ValueError("B lowers degree; need k >= 1")
    alg = tau.algebra

    def ev(*a):
        one = alg.unit()
        total = 0.0
        for i in range(k):
            args = [one] + list(a[i:]) + list(a[:i])
            total = total + (-1) ** ((k - 1) * i) * tau(*args)
        return total
    return CyclicCochain(k - 1, ev, alg, tau.reduced, label=f"B({tau.label})")


def trace_cochain(alg: SampledAlgebra) -> CyclicCochain:
    return CyclicCochain(0, lambda a: alg.trace(a), alg, label="trace")


def random_reduced_cochain(alg: MatrixAlgebra, degree: int, rng: np.random.Generator) -> CyclicCochain:
    """tau(a_0..a_k) = T . (a_0 x pi a_1 x .. x pi a_k), pi a = a - tr(a)/d.

    Reduced: vanishes as soon as a slot past 0 holds a multiple of the unit.
    """
    d = alg.d
    tensor = rng.standard_normal((d * d,) * (degree + 1))

    def proj(a):
        return (a - np.trace(a) / d * np.eye(d)).ravel()

    def ev(*a):
        out = tensor
        vecs = [a[0].ravel()] + [proj(x) for x in a[1:]]
        for v in vecs:
            out = np.tensordot(v, out, axes=([0], [0]))
        return float(out)
    return CyclicCochain(degree, ev, alg, True, label=f"random_reduced_{degree}")


def lattice_cochain(c, alg: LatticeAlgebra, **tau_kw) -> CyclicCochain:
    """tau^G_c as a cochain on the lattice algebra."""
    from .conv import tau_g

    return CyclicCochain(c.degree, lambda *a: tau_g(c, *a, **tau_kw), alg, True,
                         label=f"tau_G({c.label})")


# -- matrices over the unitization -----------------------------------------

@dataclass(frozen=True, eq=False)
class UMatrix:
    """N x N matrix over A~ = A + C: a scalar part and a grid of algebra entries."""
    algebra: SampledAlgebra
    scalar: np.ndarray
    entries: tuple

    @classmethod
    def build(cls, algebra, scalar=None, entries=None, size: Optional[int] = None):
        if size is None:
            size = len(scalar) if scalar is not None else len(entries)
        scalar = np.zeros((size, size)) if scalar is None else np.asarray(scalar)
        if entries is None:
            entries = [[algebra.zero() for _ in range(size)] for _ in range(size)]
        entries = tuple(tuple(algebra.zero() if e is None else e for e in row) for row in entries)
        if scalar.shape != (size, size) or len(entries) != size or any(len(r) != size for r in entries):
            raise ValueError("scalar and algebra parts must both be N x N")
        return cls(algebra, scalar, entries)

    @property
    def size(self) -> int:
        return len(self.scalar)

    def __matmul__(self, other: "UMatrix") -> "UMatrix":
        alg, n = self.algebra, self.size
        s = self.scalar @ other.scalar
        out = []
        for i in range(n):
            row = []
            for k in range(n):
                acc = alg.zero()
                for j in range(n):
                    a, b = self.entries[i][j], other.entries[j][k]
                    za, zb = alg.is_zero(a), alg.is_zero(b)
                    if other.scalar[j, k] != 0 and not za:
                        acc = alg.add(acc, alg.scale(a, other.scalar[j, k]))
                    if self.scalar[i, j] != 0 and not zb:
                        acc = alg.add(acc, alg.scale(b, self.scalar[i, j]))
                    if not (za or zb):
                        acc = alg.add(acc, alg.mul(a, b))
                row.append(acc)
            out.append(row)
        return UMatrix.build(alg, s, out)

    def __add__(self, other: "UMatrix") -> "UMatrix":
        alg = self.algebra
        ent = [[alg.add(a, b) for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)]
        return UMatrix.build(alg, self.scalar + other.scalar, ent)

    def __mul__(self, s: float) -> "UMatrix":
        alg = self.algebra
        return UMatrix.build(alg, self.scalar * s, [[alg.scale(a, s) for a in r] for r in self.entries])

    __rmul__ = __mul__

    def __sub__(self, other: "UMatrix") -> "UMatrix":
        return self + other * (-1.0)

    def norm(self) -> float:
        """Max row sum of |scalar_ij| + ||a_ij|| (submultiplicative)."""
        rows = [sum(abs(self.scalar[i, j]) + self.algebra.norm(self.entries[i][j]) for j in range(self.size))
                for i in range(self.size)]
        return float(max(rows)) if rows else 0.0

    def direct_sum(self, other: "UMatrix") -> "UMatrix":
        alg, n, m = self.algebra, self.size, other.size
        s = np.zeros((n + m, n + m), dtype=np.result_type(self.scalar, other.scalar))
        s[:n, :n], s[n:, n:] = self.scalar, other.scalar
        ent = [[alg.zero() for _ in range(n + m)] for _ in range(n + m)]
        for i in range(n):
            for j in range(n):
                ent[i][j] = self.entries[i][j]
        for i in range(m):
            for j in range(m):
                ent[n + i][n + j] = other.entries[i][j]
        return UMatrix.build(alg, s, ent)


def scalar_matrix(algebra, scalar) -> UMatrix:
    return UMatrix.build(algebra, np.asarray(scalar))


def algebra_matrix(algebra, entries) -> UMatrix:
    return UMatrix.build(algebra, None, entries)


class Idempotent:
    """An idempotent in M_N(A~), checked to ``tol`` in the row-sum norm."""

    def __init__(self, matrix: UMatrix, tol: float = IDEMPOTENT_TOL):
        defect = (matrix @ matrix - matrix).norm()
        if defect > tol:
            raise NotIdempotentError(f"||p^2 - p|| = {defect:.3e} exceeds {tol:.1e}")
        self.matrix = matrix
        self.defect = defect

    @property
    def algebra(self):
        return self.matrix.algebra

    @property
    def size(self) -> int:
        return self.matrix.size

    @classmethod
    def zero(cls, algebra, size: int) -> "Idempotent":
        return cls(UMatrix.build(algebra, size=size))

    def direct_sum(self, other: "Idempotent") -> "Idempotent":
        return Idempotent(self.matrix.direct_sum(other.matrix))


def newton_idempotent(m: UMatrix, tol: float = IDEMPOTENT_TOL, max_iter: int = 60) -> UMatrix:
    """Iterate p <- 3p^2 - 2p^3; converges when ||p^2 - p|| < 1/4."""
    start = (m @ m - m).norm()
    if start >= 0.25:
        raise NotIdempotentError(f"||p^2 - p|| = {start:.3e} is outside the Newton basin (< 1/4)")
    p = m
    for _ in range(max_iter):
        p2 = p @ p
        if (p2 - p).norm() <= tol:
            return p
        p = p2 * 3.0 - (p2 @ p) * 2.0
    raise NotIdempotentError("Newton idempotent iteration did not converge")


def generalized_trace(tau: CyclicCochain, mats: Sequence[UMatrix]):
    """sum over index cycles of tau(m0[i0,i1], m1[i1,i2], .., mk[ik,i0]) on algebra parts."""
    k = len(mats) - 1
    if k != tau.degree:
        raise ValueError("need degree + 1 matrices")
    n = mats[0].size
    alg = tau.algebra
    total = 0.0

    def walk(depth, first, prev, chosen):
        nonlocal total
        if depth == k:
            e = mats[k].entries[prev][first]
            if not alg.is_zero(e):
                total = total + tau(*(chosen + [e]))
            return
        for j in range(n):
            e = mats[depth].entries[prev][j]
            if not alg.is_zero(e):
                walk(depth + 1, first, j, chosen + [e])

    for i0 in range(n):
        walk(0, i0, i0, [])
    return total


def chern_pairing(p: Idempotent, q: Idempotent, tau: CyclicCochain):
    """<[p] - [q], tau> = (-1)^m (2m)!/m! [tau(tr(p - 1/2, p, .., p)) - tau(tr(q - 1/2, q, .., q))].

    tau is extended to the unitization as a reduced cochain, so the scalar
    parts (including the -1/2) never reach it.
    """
    k = tau.degree
    if k % 2:
        raise ValueError("the Chern pairing needs an even-degree cocycle")
    for e in (p, q):
        Idempotent(e.matrix)  # re-check within tolerance
    m = k // 2
    coeff = (-1) ** m * math.factorial(2 * m) / math.factorial(m)
    tp = generalized_trace(tau, [p.matrix] * (k + 1))
    tq = generalized_trace(tau, [q.matrix] * (k + 1))
    return coeff * (tp - tq)


# -- idempotent paths ------------------------------------------------------

def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def idempotent_from_projection_path(kind: str, algebra: SampledAlgebra, steps: int = 20, *,
                                    base: Optional[Idempotent] = None, angle: float = math.pi / 3,
                                    nilpotent: Optional[UMatrix] = None,
                                    perturbation: Optional[UMatrix] = None) -> List[Idempotent]:
    """Discretized idempotent path t -> p_t, t = 0, 1/steps, .., 1.

    ``constant``      p_t = base.
    ``rotation``      p_t = R_t diag(1, 0) R_t^-1 in 2 x 2 scalars, R_t rotation by t*angle.
    ``conjugation``   p_t = u_t base u_t^-1 with u_t = 1 + t X, X^2 = 0 (``nilpotent``).
    ``perturbed``     Newton re-idempotentization of base + t * ``perturbation``.
    """
    ts = np.linspace(0.0, 1.0, steps + 1)
    if kind == "constant":
        if base is None:
            raise ValueError("constant path needs a base idempotent")
        return [base for _ in ts]
    if kind == "rotation":
        p0 = np.diag([1.0, 0.0])
        return [Idempotent(scalar_matrix(algebra, rotation(t * angle) @ p0 @ rotation(-t * angle)))
                for t in ts]
    if kind == "conjugation":
        if base is None or nilpotent is None:
            raise ValueError("conjugation path needs base and nilpotent")
        if (nilpotent @ nilpotent).norm() > IDEMPOTENT_TOL:
            raise ValueError("generator must square to zero")
        one = scalar_matrix(algebra, np.eye(base.size))
        out = []
        for t in ts:
            u, uinv = one + nilpotent * t, one - nilpotent * t
            out.append(Idempotent(u @ base.matrix @ uinv))
        return out
    if kind == "perturbed":
        if base is None or perturbation is None:
            raise ValueError("perturbed path needs base and perturbation")
        return [Idempotent(newton_idempotent(base.matrix + perturbation * t)) for t in ts]
    raise ValueError(f"unknown path kind {kind!r}")


def pairing_drift(path: Sequence[Idempotent], tau: CyclicCochain, reference: Optional[Idempotent] = None):
    """(values along the path, max |value - value_0|)."""
    ref = reference or Idempotent.zero(path[0].algebra, path[0].size)
    vals = np.array([chern_pairing(p, ref, tau) for p in path])
    return vals, float(np.max(np.abs(vals - vals[0])))


__all__ = [
    "CyclicCochain", "Idempotent", "LatticeAlgebra", "MatrixAlgebra", "SampledAlgebra", "UMatrix",
    "algebra_matrix", "chern_pairing", "connes_B", "generalized_trace", "hochschild_b",
    "idempotent_from_projection_path", "lattice_cochain", "newton_idempotent", "pairing_drift",
    "random_reduced_cochain", "scalar_matrix", "trace_cochain",
]
