"""Characteristic forms and the right-hand side of the higher index formula.

Desk models are M = R^n x S with G = R^n translating the first factor and S
a finite weighted slice sample.  Differential forms live on the R^n factor:
a form is a dict from increasing index tuples I to coefficient callables
f_I(y, s), standing for f_I dx_I.  Matrix-valued forms (curvatures) have
coefficients with two trailing matrix axes and wedge by matrix product.
The classifying map psi : M -> G/K = R^n is the projection, so psi^* alpha
is alpha extended constantly along S.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from .errors import DegreeMismatchError
from .proper import Cutoff, integrate_with_cutoff

MAX_DIM = 4
DIFF_STEP = 1e-4


def constant(value) -> Callable:
    value = np.asarray(value)

    def f(y, s):
        y = np.asarray(y)
        return np.broadcast_to(value, y.shape[:-1] + value.shape)
    return f


def _sort_sign(idx: Tuple[int, ...]):
    """(sorted tuple, sign of the sorting permutation), or (None, 0) on a repeat."""
    if len(set(idx)) != len(idx):
        return None, 0
    perm = sorted(range(len(idx)), key=lambda i: idx[i])
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return tuple(sorted(idx)), sign


@dataclass(frozen=True)
class Form:
    """A (possibly matrix-valued) differential form on R^n with coefficient callables."""
    n: int
    terms: Dict[Tuple[int, ...], Callable] = field(default_factory=dict)
    matrix: bool = False

    def __post_init__(self):
        for idx in self.terms:
            if tuple(sorted(idx)) != tuple(idx) or len(set(idx)) != len(idx):
                raise ValueError(f"index tuple {idx} must be strictly increasing")
            if any(i < 0 or i >= self.n for i in idx):
                raise ValueError(f"index tuple {idx} out of range for R^{self.n}")

    @classmethod
    def scalar(cls, n: int, value=1.0) -> "Form":
        return cls(n, {(): value if callable(value) else constant(value)})

    @classmethod
    def basis(cls, n: int, idx: Tuple[int, ...], coeff=1.0) -> "Form":
        """coeff dx_{i1} ^ .. ^ dx_{ik} (any order; sorted with sign)."""
        key, sign = _sort_sign(tuple(idx))
        if key is None:
            return cls(n, {})
        f = coeff if callable(coeff) else constant(coeff)
        return cls(n, {key: (lambda y, s, f=f, sign=sign: sign * f(y, s))})

    @classmethod
    def volume(cls, n: int) -> "Form":
        return cls.basis(n, tuple(range(n)))

    def degrees(self):
        return sorted({len(i) for i in self.terms})

    def part(self, k: int) -> "Form":
        return Form(self.n, {i: f for i, f in self.terms.items() if len(i) == k}, self.matrix)

    def __add__(self, other: "Form") -> "Form":
        if other.n != self.n or other.matrix != self.matrix:
            raise ValueError("forms of different type")
        terms = dict(self.terms)
        for i, f in other.terms.items():
            if i in terms:
                g = terms[i]
                terms[i] = (lambda y, s, f=f, g=g: g(y, s) + f(y, s))
            else:
                terms[i] = f
        return Form(self.n, terms, self.matrix)

    def __mul__(self, c) -> "Form":
        return Form(self.n, {i: (lambda y, s, f=f: c * f(y, s)) for i, f in self.terms.items()}, self.matrix)

    __rmul__ = __mul__

    def __sub__(self, other: "Form") -> "Form":
        return self + other * (-1.0)

    def wedge(self, other: "Form") -> "Form":
        if other.n != self.n:
            raise ValueError("forms on different spaces")
        matrix = self.matrix or other.matrix
        terms: Dict[Tuple[int, ...], Callable] = {}
        for (i, f), (j, g) in itertools.product(self.terms.items(), other.terms.items()):
            key, sign = _sort_sign(i + j)
            if key is None:
                continue
            if self.matrix and other.matrix:
                prod = (lambda y, s, f=f, g=g, sign=sign: sign * (f(y, s) @ g(y, s)))
            elif self.matrix:
                prod = (lambda y, s, f=f, g=g, sign=sign: sign * f(y, s) * g(y, s)[..., None, None])
            elif other.matrix:
                prod = (lambda y, s, f=f, g=g, sign=sign: sign * f(y, s)[..., None, None] * g(y, s))
            else:
                prod = (lambda y, s, f=f, g=g, sign=sign: sign * f(y, s) * g(y, s))
            if key in terms:
                h = terms[key]
                terms[key] = (lambda y, s, h=h, prod=prod: h(y, s) + prod(y, s))
            else:
                terms[key] = prod
        return Form(self.n, terms, matrix)

    def trace(self) -> "Form":
        if not self.matrix:
            return self
        return Form(self.n, {i: (lambda y, s, f=f: np.trace(f(y, s), axis1=-2, axis2=-1))
                             for i, f in self.terms.items()})

    def coefficient(self, idx: Tuple[int, ...], y, s):
        """Coefficient of dx_idx at (y, s); zero if absent."""
        key, sign = _sort_sign(tuple(idx))
        y = np.asarray(y, dtype=float)
        if key is None or key not in self.terms:
            return np.zeros(y.shape[:-1])
        return sign * self.terms[key](y, s)

    def top(self, y, s):
        return self.coefficient(tuple(range(self.n)), y, s)


def exterior_derivative(form: Form, step: float = DIFF_STEP) -> Form:
    """d(f dx_I) = sum_j d_j f dx_j ^ dx_I by central differences in y."""
    out = Form(form.n, {}, form.matrix)
    for idx, f in form.terms.items():
        for j in range(form.n):
            if j in idx:
                continue
            e = np.zeros(form.n)
            e[j] = step

            def df(y, s, f=f, e=e):
                y = np.asarray(y, dtype=float)
                return (f(y + e, s) - f(y - e, s)) / (2 * step)
            out = out + Form.basis(form.n, (j,) + idx, df)
    return out


# -- curvature and characteristic forms ------------------------------------

@dataclass(frozen=True)
class CurvatureData:
    """Curvature 2-forms of the tangent bundle (real antisymmetric) and of E (skew-Hermitian)."""
    n: int
    riemann: Form
    bundle: Form
    rank: int

    @classmethod
    def flat(cls, n: int, rank: int = 1) -> "CurvatureData":
        return cls(n, Form(n, {}, True), Form(n, {}, True), rank)

    @classmethod
    def constant_curvature(cls, n: int, riemann: Dict[Tuple[int, int], np.ndarray] = None,
                           bundle: Dict[Tuple[int, int], np.ndarray] = None, rank: int = 1) -> "CurvatureData":
        def build(blocks):
            out = Form(n, {}, True)
            for (i, j), m in (blocks or {}).items():
                out = out + Form(n, Form.basis(n, (i, j), constant(np.asarray(m))).terms, True)
            return out
        return cls(n, build(riemann), build(bundle), rank)

    @classmethod
    def magnetic(cls, B: float, n: int = 2) -> "CurvatureData":
        """Line bundle on R^2 with F = -i B dx ^ dy."""
        return cls.constant_curvature(n, bundle={(0, 1): np.array([[-1j * B]])}, rank=1)

    def __post_init__(self):
        if not 1 <= self.n <= MAX_DIM:
            raise ValueError(f"desk models have dimension 1..{MAX_DIM}")

    def symmetry_defect(self, rng: np.random.Generator, samples: int = 10, slices: int = 1) -> float:
        """max of |R + R^T| and |F + F^*| over sampled points."""
        worst = 0.0
        y = rng.standard_normal((samples, self.n))
        s = rng.integers(0, slices, samples)
        for form, conj in ((self.riemann, False), (self.bundle, True)):
            for f in form.terms.values():
                m = np.asarray(f(y, s))
                mt = np.swapaxes(m, -1, -2)
                worst = max(worst, float(np.max(np.abs(m + (mt.conj() if conj else mt)), initial=0.0)))
        return worst

    def invariance_defect(self, rng: np.random.Generator, samples: int = 10, slices: int = 1) -> float:
        """max |coefficient(y + g) - coefficient(y)| over random translations g."""
        worst = 0.0
        y = rng.standard_normal((samples, self.n))
        g = 5.0 * rng.standard_normal((samples, self.n))
        s = rng.integers(0, slices, samples)
        for form in (self.riemann, self.bundle):
            for f in form.terms.values():
                worst = max(worst, float(np.max(np.abs(np.asarray(f(y + g, s)) - np.asarray(f(y, s))),
                                                initial=0.0)))
        return worst


@dataclass(frozen=True)
class CharacteristicForm:
    """Graded scalar form: pieces[k] is the degree-k component."""
    n: int
    pieces: Dict[int, Form]
    name: str = ""

    def piece(self, k: int) -> Optional[Form]:
        return self.pieces.get(k)

    def wedge(self, other: "CharacteristicForm") -> "CharacteristicForm":
        out: Dict[int, Form] = {}
        for (a, fa), (b, fb) in itertools.product(self.pieces.items(), other.pieces.items()):
            if a + b > self.n:
                continue
            w = fa.wedge(fb)
            out[a + b] = out[a + b] + w if a + b in out else w
        return CharacteristicForm(self.n, out, f"{self.name}^{other.name}")

    def __add__(self, other: "CharacteristicForm") -> "CharacteristicForm":
        out = dict(self.pieces)
        for k, f in other.pieces.items():
            out[k] = out[k] + f if k in out else f
        return CharacteristicForm(self.n, out, f"{self.name}+{other.name}")

    def degree0(self, y=None, s=None):
        y = np.zeros((1, self.n)) if y is None else y
        s = np.zeros(1, dtype=int) if s is None else s
        return self.pieces[0].coefficient((), y, s)


def pontryagin1(c: CurvatureData) -> Form:
    """p_1 = -(1 / 8 pi^2) tr(R ^ R)."""
    return c.riemann.wedge(c.riemann).trace() * (-1.0 / (8 * np.pi ** 2))


def _even_series(c: CurvatureData, coeff_p1: float, name: str) -> CharacteristicForm:
    n = c.n
    pieces = {0: Form.scalar(n, 1.0), 2: Form(n, {}), 4: Form(n, {})}
    if n >= 4:
        pieces[4] = pontryagin1(c) * coeff_p1
    return CharacteristicForm(n, {k: f for k, f in pieces.items() if k <= n}, name)


def a_hat_form(c: CurvatureData) -> CharacteristicForm:
    """A-hat = 1 - p_1 / 24 (truncated at degree 4)."""
    return _even_series(c, -1.0 / 24.0, "Ahat")


def l_form(c: CurvatureData) -> CharacteristicForm:
    """L = 1 + p_1 / 3 (truncated at degree 4)."""
    return _even_series(c, 1.0 / 3.0, "L")


def chern_character(c: CurvatureData) -> CharacteristicForm:
    """Ch' = rk + tr(iF / 2 pi) + (1/2) tr((iF / 2 pi)^2), truncated at dim M."""
    n = c.n
    x = c.bundle * (1j / (2 * np.pi))
    pieces = {0: Form.scalar(n, float(c.rank))}
    if n >= 2:
        pieces[2] = _real(x.trace())
    if n >= 4:
        pieces[4] = _real(x.wedge(x).trace() * 0.5)
    return CharacteristicForm(n, pieces, "Ch")


def _real(form: Form) -> Form:
    return Form(form.n, {i: (lambda y, s, f=f: np.real(f(y, s))) for i, f in form.terms.items()})


def atiyah_singer_form(c: CurvatureData) -> CharacteristicForm:
    return a_hat_form(c).wedge(chern_character(c))


# -- the right-hand side ---------------------------------------------------

def _as_graded(alpha) -> Form:
    if isinstance(alpha, Form):
        return alpha
    raise TypeError("alpha must be a Form on the R^n factor")


def higher_index_rhs(AS: CharacteristicForm, chi: Cutoff, alpha: Form,
                     points_per_axis: Optional[int] = None) -> float:
    """int_M chi (AS ^ psi^* alpha)_top."""
    alpha = _as_graded(alpha)
    n = AS.n
    if chi.action.n != n or alpha.n != n:
        raise ValueError("cut-off, form and characteristic class live on different spaces")
    degs = alpha.degrees() or [0]
    if max(degs) > n:
        raise DegreeMismatchError(f"deg alpha = {max(degs)} exceeds dim M = {n}")
    top = Form(n, {})
    matched = False
    for k in degs:
        piece = AS.piece(n - k)
        if piece is None:
            continue
        matched = True
        top = top + piece.wedge(alpha.part(k))
    if not matched:
        raise DegreeMismatchError(f"no graded piece completes deg alpha in {degs} to degree {n}")
    return integrate_with_cutoff(chi, lambda y, s: np.real(top.top(y, s)), points_per_axis)


def higher_signature(L: CharacteristicForm, chi: Cutoff, alpha: Form, **kw) -> float:
    return higher_index_rhs(L, chi, alpha, **kw)


def higher_a_hat(A: CharacteristicForm, chi: Cutoff, alpha: Form, **kw) -> float:
    return higher_index_rhs(A, chi, alpha, **kw)


__all__ = [
    "CharacteristicForm", "CurvatureData", "Form", "a_hat_form", "atiyah_singer_form",
    "chern_character", "constant", "exterior_derivative", "higher_a_hat", "higher_index_rhs",
    "higher_signature", "l_form", "pontryagin1",
]
