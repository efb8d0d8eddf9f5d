"""Concrete models of a nonpositively curved symmetric space G/K.

Two models are built in:

* ``Euclidean(n)``: G = R^n acting by translation, K trivial.  Points, group
  elements and tangent vectors are arrays with trailing axis of length n.
* ``HyperbolicPlane``: G = SL(2, R) acting on the upper half-plane by Moebius
  transformations, K = SO(2) fixing the basepoint ``i``.  Points and tangent
  vectors are complex numbers, group elements are ``(..., 2, 2)`` real arrays.

All operations broadcast over leading axes so that quadrature code can push
whole node sets through a single call.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import HyperbolicDomainError

DET_RENORM_TOL = 1e-8
IM_FLOOR = 1e-14


@dataclass(frozen=True)
class SymmetricSpaceModel:
    kind: str
    n: int = 2

    def __post_init__(self):
        if self.kind not in ("euclidean", "hyperbolic"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.kind == "euclidean" and self.n < 1:
            raise ValueError("Euclidean dimension must be positive")
        if self.kind == "hyperbolic" and self.n != 2:
            raise ValueError("the hyperbolic plane has dimension 2")

    # -- construction -----------------------------------------------------

    @classmethod
    def euclidean(cls, n: int = 2) -> "SymmetricSpaceModel":
        return cls("euclidean", int(n))

    @classmethod
    def hyperbolic(cls) -> "SymmetricSpaceModel":
        return cls("hyperbolic", 2)

    @property
    def is_euclidean(self) -> bool:
        return self.kind == "euclidean"

    @property
    def dim(self) -> int:
        """Dimension of G/K."""
        return self.n

    @property
    def basepoint(self):
        if self.is_euclidean:
            return np.zeros(self.n)
        return np.complex128(1j)

    def identity(self):
        if self.is_euclidean:
            return np.zeros(self.n)
        return np.eye(2)

    def element(self, g) -> np.ndarray:
        """Validate a group element (renormalizing SL(2) drift)."""
        g = np.asarray(g, dtype=float)
        if self.is_euclidean:
            if g.shape[-1:] != (self.n,):
                raise ValueError(f"expected trailing axis {self.n}, got shape {g.shape}")
            if not np.all(np.isfinite(g)):
                raise ValueError("non-finite group element")
            return g
        if g.shape[-2:] != (2, 2):
            raise ValueError(f"expected (..., 2, 2) matrices, got shape {g.shape}")
        det = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0]
        if np.any(~np.isfinite(det)) or np.any(np.abs(det - 1.0) > DET_RENORM_TOL):
            raise HyperbolicDomainError("matrix is not in SL(2, R) within 1e-8")
        return g / np.sqrt(det)[..., None, None]

    def point(self, x):
        if self.is_euclidean:
            x = np.asarray(x, dtype=float)
            if x.shape[-1:] != (self.n,):
                raise ValueError(f"expected trailing axis {self.n}, got shape {x.shape}")
            return x
        x = np.asarray(x, dtype=complex)
        if np.any(~(x.imag > IM_FLOOR)):
            raise HyperbolicDomainError("point is not in the upper half-plane")
        return x

    # -- group law --------------------------------------------------------

    def compose(self, g, h):
        if self.is_euclidean:
            return np.asarray(g) + np.asarray(h)
        return np.asarray(g) @ np.asarray(h)

    def inverse(self, g):
        g = np.asarray(g)
        if self.is_euclidean:
            return -g
        inv = np.empty_like(g, dtype=float)
        inv[..., 0, 0] = g[..., 1, 1]
        inv[..., 1, 1] = g[..., 0, 0]
        inv[..., 0, 1] = -g[..., 0, 1]
        inv[..., 1, 0] = -g[..., 1, 0]
        return inv

    def act(self, g, x):
        """Left action of g on the point x."""
        if self.is_euclidean:
            return np.asarray(g) + np.asarray(x)
        g = np.asarray(g)
        x = np.asarray(x, dtype=complex)
        a, b, c, d = g[..., 0, 0], g[..., 0, 1], g[..., 1, 0], g[..., 1, 1]
        z = (a * x + b) / (c * x + d)
        if np.any(~(z.imag > IM_FLOOR)):
            raise HyperbolicDomainError("Moebius image left the upper half-plane")
        return z

    def pushforward(self, g, x, v):
        """Differential of x -> g.x applied to the tangent vector v at x."""
        if self.is_euclidean:
            return np.asarray(v)
        g = np.asarray(g)
        c, d = g[..., 1, 0], g[..., 1, 1]
        return np.asarray(v) / (c * np.asarray(x) + d) ** 2

    def orbit_point(self, g):
        """The point g.basepoint."""
        if self.is_euclidean:
            return np.asarray(g, dtype=float)
        return self.act(g, self.basepoint)

    def element_from_point(self, x):
        """A group element moving the basepoint to x (the AN-section)."""
        if self.is_euclidean:
            return np.asarray(x, dtype=float)
        x = np.asarray(x, dtype=complex)
        sy = np.sqrt(x.imag)
        g = np.zeros(x.shape + (2, 2))
        g[..., 0, 0] = sy
        g[..., 0, 1] = x.real / sy
        g[..., 1, 1] = 1.0 / sy
        return g

    def rotation(self, theta):
        """Element of K rotating tangent vectors at the basepoint by theta."""
        if self.is_euclidean:
            return np.zeros(np.shape(theta) + (self.n,))
        theta = np.asarray(theta, dtype=float)
        c, s = np.cos(theta / 2), np.sin(theta / 2)
        return np.stack([np.stack([c, s], -1), np.stack([-s, c], -1)], -2)

    # -- metric -----------------------------------------------------------

    def distance(self, x, y):
        if self.is_euclidean:
            return np.linalg.norm(np.asarray(x) - np.asarray(y), axis=-1)
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        # 2 asinh form of arccosh(1 + |x-y|^2 / (2 Im x Im y)); no cancellation near x = y
        return 2.0 * np.arcsinh(np.abs(x - y) / (2.0 * np.sqrt(x.imag * y.imag)))

    def tangent_norm(self, x, v):
        if self.is_euclidean:
            return np.linalg.norm(v, axis=-1)
        return np.abs(v) / np.asarray(x).imag

    def log_base(self, x):
        """Riemannian logarithm at the basepoint."""
        if self.is_euclidean:
            return np.asarray(x, dtype=float)
        x = np.asarray(x, dtype=complex)
        r = self.distance(1j, x)
        w = (x - 1j) / (x + 1j)
        aw = np.abs(w)
        unit = np.where(aw > 0, w / np.where(aw > 0, aw, 1.0), 0.0)
        return 1j * r * unit

    def exp_base(self, v):
        """Riemannian exponential at the basepoint (radial isometry)."""
        if self.is_euclidean:
            return np.asarray(v, dtype=float)
        v = np.asarray(v, dtype=complex)
        r = np.abs(v)
        phi = np.angle(v)
        half = 0.5 * (phi - 0.5 * np.pi)
        c, s = np.cos(half), np.sin(half)
        y = np.exp(r)
        # K-rotation applied to the vertical point i*e^r
        return (s + 1j * c * y) / (c - 1j * s * y)

    def contraction(self, s, x):
        """phi_s(x) = exp(s log x): the geodesic contraction to the basepoint."""
        s = np.asarray(s, dtype=float)
        if self.is_euclidean:
            return s[..., None] * np.asarray(x, dtype=float) if s.ndim else s * np.asarray(x, dtype=float)
        return self.exp_base(s * self.log_base(x))

    def geodesic_point(self, x, y, u):
        """Point at fraction u of the geodesic from x to y."""
        u = np.asarray(u, dtype=float)
        if self.is_euclidean:
            x = np.asarray(x, dtype=float)
            y = np.asarray(y, dtype=float)
            return x + u[..., None] * (y - x) if u.ndim else x + u * (y - x)
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        # translate x to i by the affine map z -> (z - Re x) / Im x
        a, b = x.real, x.imag
        y0 = (y - a) / b
        return a + b * self.exp_base(u * self.log_base(y0))

    def _radial_unit(self, rho, phi):
        """Unit vector pointing away from i at the point exp(rho e^{i phi})."""
        half = 0.5 * (phi - 0.5 * np.pi)
        c, s = np.cos(half), np.sin(half)
        z = 1j * np.exp(rho)
        return z / (c - z * s) ** 2

    def geodesic_jet(self, x, y, u, ws=()):
        """geodesic_point together with its exact first derivatives.

        Returns ``(p, dp_du, [D_y p (w) for w in ws])``: the velocity in u and
        the differential in the endpoint y applied to tangent vectors at y.
        In geodesic polar coordinates about x the map is (r, phi) -> (u r, phi),
        so radial components scale by u and angular ones by sinh(ur)/sinh(r).
        """
        u = np.asarray(u, dtype=float)
        if self.is_euclidean:
            x = np.asarray(x, dtype=float)
            y = np.asarray(y, dtype=float)
            ue = u[..., None] if u.ndim else u
            return x + ue * (y - x), np.broadcast_to(y - x, np.broadcast_shapes(x.shape, y.shape, np.shape(ue))), [ue * w for w in ws]
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        a, b = x.real, x.imag
        y0 = (y - a) / b
        v = self.log_base(y0)
        r = np.abs(v)
        phi = np.angle(v)
        p0 = self.exp_base(u * v)
        e_p = self._radial_unit(u * r, phi)
        du = b * r * e_p
        pushed = []
        if ws:
            e_y = self._radial_unit(r, phi)
            metric = y0.imag ** 2
            tiny = r < 1e-12
            ratio = np.where(tiny, u, np.sinh(u * r) / np.where(tiny, 1.0, np.sinh(r)))
            for w in ws:
                w0 = np.asarray(w) / b
                radial = np.real(np.conj(e_y) * w0) / metric
                angular = np.real(np.conj(1j * e_y) * w0) / metric
                pushed.append(b * (u * radial * e_p + ratio * angular * (1j * e_p)))
        return a + b * p0, du, pushed

    # -- sampling ---------------------------------------------------------

    def random_element(self, rng: np.random.Generator, radius, size=None):
        """Group elements with d(g) = radius in a uniform random direction."""
        radius = np.broadcast_to(np.asarray(radius, dtype=float), size if size is not None else np.shape(radius))
        shape = radius.shape
        if self.is_euclidean:
            d = rng.standard_normal(shape + (self.n,))
            d /= np.linalg.norm(d, axis=-1, keepdims=True)
            return radius[..., None] * d
        phi = rng.uniform(0.0, 2 * np.pi, shape)
        theta = rng.uniform(0.0, 2 * np.pi, shape)
        x = self.exp_base(radius * np.exp(1j * phi))
        return self.compose(self.element_from_point(x), self.rotation(theta))

    def random_tangent(self, rng: np.random.Generator, size=None):
        shape = () if size is None else tuple(np.atleast_1d(size))
        if self.is_euclidean:
            return rng.standard_normal(shape + (self.n,))
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


Euclidean = SymmetricSpaceModel.euclidean
HyperbolicPlane = SymmetricSpaceModel.hyperbolic


def _as_real_pair(v):
    v = np.asarray(v)
    if np.iscomplexobj(v):
        return np.stack([v.real, v.imag], axis=-1)
    return v


@dataclass(frozen=True)
class InvariantForm:
    """A G-invariant differential k-form on G/K.

    ``evaluator(x, vs)`` receives a batch of points and a list of k tangent
    vector batches and returns the real value of the form.
    """
    degree: int
    evaluator: Callable
    model: SymmetricSpaceModel
    tag: Optional[str] = None

    def __call__(self, x, *vs):
        if len(vs) != self.degree:
            raise ValueError(f"{self.degree}-form needs {self.degree} tangent vectors, got {len(vs)}")
        return self.evaluator(x, list(vs))

    def scaled(self, factor: float) -> "InvariantForm":
        ev = self.evaluator
        return InvariantForm(self.degree, lambda x, vs: factor * ev(x, vs), self.model,
                             None if self.tag is None else f"{factor}*{self.tag}")


def volume_form(model: SymmetricSpaceModel) -> InvariantForm:
    """Riemannian volume form: dx^1...dx^n, resp. dx dy / y^2."""
    if model.is_euclidean:
        def ev(x, vs):
            return np.linalg.det(np.stack(vs, axis=-1)) if vs else np.ones(np.shape(x)[:-1])
        return InvariantForm(model.n, ev, model, "euclidean-volume")

    def ev(x, vs):
        v1, v2 = vs
        return np.imag(np.conj(v1) * v2) / np.asarray(x).imag ** 2
    return InvariantForm(2, ev, model, "hyperbolic-area")


def constant_form(model: SymmetricSpaceModel, degree: int, coeffs) -> InvariantForm:
    """Translation-invariant form sum_I c_I dx^I on Euclidean(n).

    ``coeffs`` is indexed by increasing index tuples in lexicographic order.
    """
    from itertools import combinations

    if not model.is_euclidean:
        raise ValueError("constant-coefficient forms are only invariant on Euclidean models")
    idx = list(combinations(range(model.n), degree))
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (len(idx),):
        raise ValueError(f"need {len(idx)} coefficients for a {degree}-form on R^{model.n}")

    def ev(x, vs):
        x = np.asarray(x)
        if degree == 0:
            return np.full(x.shape[:-1], coeffs[0])
        mat = np.stack(vs, axis=-1)
        out = np.zeros(np.broadcast_shapes(x.shape[:-1], mat.shape[:-2]))
        for c, rows in zip(coeffs, idx):
            if c != 0.0:
                out = out + c * np.linalg.det(mat[..., list(rows), :])
        return out
    return InvariantForm(degree, ev, model, f"const{degree}")


def invariance_defect(form: InvariantForm, rng: np.random.Generator, n_elements: int = 100,
                      radius: float = 2.0) -> float:
    """Max |alpha(g.x)(g_* v) - alpha(x)(v)| over random g, x, v."""
    model = form.model
    g = model.random_element(rng, rng.uniform(0, radius, n_elements))
    x = model.orbit_point(model.random_element(rng, rng.uniform(0, radius, n_elements)))
    vs = [model.random_tangent(rng, n_elements) for _ in range(form.degree)]
    gx = model.act(g, x)
    gvs = [model.pushforward(g, x, v) for v in vs]
    return float(np.max(np.abs(form(gx, *gvs) - form(x, *vs))))


def alternation_defect(form: InvariantForm, rng: np.random.Generator, n_samples: int = 50) -> float:
    """Max |alpha(..v_i..v_j..) + alpha(..v_j..v_i..)| over random swaps."""
    if form.degree < 2:
        return 0.0
    model = form.model
    x = model.orbit_point(model.random_element(rng, rng.uniform(0, 2, n_samples)))
    vs = [model.random_tangent(rng, n_samples) for _ in range(form.degree)]
    worst = 0.0
    for i in range(form.degree):
        for j in range(i + 1, form.degree):
            sw = list(vs)
            sw[i], sw[j] = sw[j], sw[i]
            worst = max(worst, float(np.max(np.abs(form(x, *vs) + form(x, *sw)))))
    return worst
