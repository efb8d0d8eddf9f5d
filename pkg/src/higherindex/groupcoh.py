"""Smooth homogeneous group cochains, the J-map, van Est forms and growth profiles."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import TruncationError
from .geom import InvariantForm, SymmetricSpaceModel
from .simplex import QuadratureRule, integrate_form_points


@dataclass(frozen=True)
class GroupCochain:
    """A k-cochain c(g_0..g_k) on G, vectorized over leading batch axes.

    ``fast_kind`` names a closed form that lattice kernels may substitute for
    the evaluator (currently only ``"area2"``, half the cross product of
    g_1 - g_0 and g_2 - g_0 on R^2).
    """
    degree: int
    evaluator: Callable
    model: SymmetricSpaceModel
    homogeneous: bool = True
    fast_kind: Optional[str] = None
    label: str = field(default="", compare=False)

    def __call__(self, *gs):
        if len(gs) != self.degree + 1:
            raise ValueError(f"{self.degree}-cochain takes {self.degree + 1} arguments, got {len(gs)}")
        return self.evaluator(*gs)

    def homogeneity_defect(self, rng: np.random.Generator, n_samples: int = 20, radius: float = 2.0) -> float:
        m = self.model
        gs = [m.random_element(rng, rng.uniform(0, radius, n_samples)) for _ in range(self.degree + 1)]
        h = m.random_element(rng, rng.uniform(0, radius, n_samples))
        moved = [m.compose(h, g) for g in gs]
        return float(np.max(np.abs(np.asarray(self(*moved)) - np.asarray(self(*gs)))))


def constant_cochain(model: SymmetricSpaceModel, value: float = 1.0, degree: int = 0) -> GroupCochain:
    def ev(*gs):
        shape = np.shape(gs[0])[:-1] if model.is_euclidean else np.shape(gs[0])[:-2]
        return np.full(shape, float(value))
    return GroupCochain(degree, ev, model, fast_kind="const" if degree == 0 else None,
                        label=f"const({value})")


def delta(c: GroupCochain) -> GroupCochain:
    """(dc)(g_0..g_{k+1}) = sum_i (-1)^i c(g_0, .., omit g_i, .., g_{k+1})."""
    k = c.degree

    def ev(*gs):
        total = 0.0
        for i in range(k + 2):
            term = c(*(gs[:i] + gs[i + 1:]))
            total = total + term if i % 2 == 0 else total - term
        return total
    return GroupCochain(k + 1, ev, c.model, c.homogeneous, label=f"delta({c.label})")


def j_map(alpha: InvariantForm, model: SymmetricSpaceModel, q: Optional[QuadratureRule] = None,
          **integrate_kw) -> GroupCochain:
    """J(alpha)(g_0..g_k): integral of alpha over the geodesic simplex."""
    k = alpha.degree
    q = q or QuadratureRule(k, 1 if model.is_euclidean else 120)
    if q.k != k:
        raise ValueError("quadrature degree does not match form degree")

    def ev(*gs):
        pts = [model.orbit_point(model.element(g)) for g in gs]
        return integrate_form_points(alpha, pts, q, **integrate_kw)

    fast = "area2" if (model.is_euclidean and model.n == 2 and alpha.tag == "euclidean-volume") else None
    return GroupCochain(k, ev, model, True, fast_kind=fast, label=f"J({alpha.tag})")


def cyclic_symmetrize(c: GroupCochain) -> GroupCochain:
    """c_lambda = (1/(k+1)) sum_j (-1)^{kj} t^j c with (tc)(g_0..g_k) = c(g_k, g_0..g_{k-1})."""
    k = c.degree

    def ev(*gs):
        total = 0.0
        for j in range(k + 1):
            # (t^j c)(g_0..g_k) = c(g_{k-j+1}, .., g_k, g_0, .., g_{k-j})
            args = gs[k + 1 - j:] + gs[:k + 1 - j]
            sign = -1.0 if (k * j) % 2 else 1.0
            total = total + sign * c(*args)
        return total / (k + 1)
    return GroupCochain(k, ev, c.model, c.homogeneous, fast_kind=c.fast_kind,
                        label=f"sym({c.label})")


def cyclic_rotate(c: GroupCochain, times: int = 1) -> GroupCochain:
    """t^times c."""
    k = c.degree
    j = times % (k + 1)

    def ev(*gs):
        return c(*(gs[k + 1 - j:] + gs[:k + 1 - j]))
    return GroupCochain(k, ev, c.model, c.homogeneous, label=f"t^{j}({c.label})")


# -- van Est ---------------------------------------------------------------

def _perm_sign(perm) -> int:
    sign = 1
    perm = list(perm)
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def vanest_form(c: GroupCochain, chi, x, vs: Sequence, slice_index: int = 0,
                points_per_axis: int = 7, step: Optional[float] = None,
                box: Optional[float] = None, renormalize: bool = True) -> float:
    """omega_c(x)(v_1..v_k) = (d_1 .. d_k f_c) restricted to the diagonal.

    G = R^n acts on M = G x S by translation of the first factor, so after
    the substitution y_i = x_i - g_i

        f_c(x_0..x_k) = int prod_i chi(y_i, s) c(x_0 - y_0, .., x_k - y_k) dy.

    The y-integrals use a tensor Gauss-Legendre rule on chi's support box.
    Since int_G chi = 1, the discrete weights w_j chi(y_j) are rescaled to
    sum to one (``renormalize``); this removes the quadrature error of the
    normalization, which otherwise dominates for coarse rules.
    Each d_i is a central difference in slot i; the k slots are
    antisymmetrized over assignments of v_1..v_k (no 1/k! factor), so that
    J(dx^dy) is returned as dx^dy.
    """
    model = c.model
    if not model.is_euclidean:
        raise NotImplementedError("van Est forms are implemented for G = R^n")
    n = model.n
    k = c.degree
    x = np.asarray(x, dtype=float)
    vs = [np.asarray(v, dtype=float) for v in vs]
    if len(vs) != k:
        raise ValueError(f"a {k}-form needs {k} tangent vectors")
    radius = chi.support_radius
    if box is not None and box < radius:
        raise TruncationError(f"integration box {box} does not contain supp chi (radius {radius})")
    half = radius if box is None else box

    xg, wg = np.polynomial.legendre.leggauss(points_per_axis)
    axes = np.meshgrid(*([xg * half] * n), indexing="ij")
    waxes = np.meshgrid(*([wg * half] * n), indexing="ij")
    y = np.stack([a.ravel() for a in axes], axis=-1)
    w = np.prod(np.stack([a.ravel() for a in waxes], axis=-1), axis=-1)
    weight = w * chi(y, np.full(len(w), slice_index))
    keep = weight != 0.0
    y, weight = y[keep], weight[keep]
    if renormalize:
        weight = weight / weight.sum()
    m = len(weight)

    def f(xs):
        # xs: k+1 points; broadcast slot i over axis i of a (m,)*(k+1) grid
        args = []
        for i, xi in enumerate(xs):
            shape = [1] * (k + 1) + [n]
            shape[i] = m
            args.append(xi - y.reshape(shape))
        vals = np.asarray(c(*args))
        wt = weight
        out = vals
        for _ in range(k + 1):
            out = np.tensordot(out, wt, axes=([0], [0]))
        return float(out)

    if k == 0:
        return f([x])
    h = step if step is not None else 1e-4 * (1.0 + np.linalg.norm(x))
    total = 0.0
    for perm in itertools.permutations(range(k)):
        sign = _perm_sign(perm)
        acc = 0.0
        for signs in itertools.product((1.0, -1.0), repeat=k):
            xs = [x] + [x + s * h * vs[perm[i]] for i, s in enumerate(signs)]
            acc += np.prod(signs) * f(xs)
        total += sign * acc / (2.0 * h) ** k
    return total


# -- growth ----------------------------------------------------------------

@dataclass(frozen=True)
class GrowthReport:
    radii: np.ndarray
    max_abs: np.ndarray
    max_ratio: np.ndarray
    exponent: float
    degree: int

    def bounded(self, factor: float = 2.0) -> bool:
        """Last-shell ratio within ``factor`` of the median ratio."""
        return bool(self.max_ratio[-1] <= factor * np.median(self.max_ratio))

    def rows(self):
        for r, a, q in zip(self.radii, self.max_abs, self.max_ratio):
            yield {"radius": float(r), "max_abs": float(a), "max_ratio": float(q)}


def growth_profile(c: GroupCochain, radii: Sequence[float], samples: int = 200,
                   seed: int = 0) -> GrowthReport:
    """Max |c| on shells d(g_i) = R and its ratio to prod_i (1 + d(g_i))^k.

    The exponent is the least-squares slope of log max|c| against
    log prod_i (1 + d(g_i)).
    """
    model = c.model
    k = c.degree
    radii = np.asarray(radii, dtype=float)
    max_abs = np.empty(len(radii))
    max_ratio = np.empty(len(radii))
    for i, r in enumerate(radii):
        rng = np.random.default_rng([seed, i])
        gs = [model.random_element(rng, r, size=samples) for _ in range(k + 1)]
        vals = np.abs(np.asarray(c(*gs), dtype=float))
        prod = np.ones(samples)
        for g in gs:
            prod = prod * (1.0 + model.distance(model.basepoint, model.orbit_point(g)))
        max_abs[i] = vals.max()
        max_ratio[i] = np.max(vals / prod ** k)
    logp = (k + 1) * np.log1p(radii)
    floor = np.finfo(float).tiny
    if len(radii) > 1 and np.ptp(logp) > 0:
        exponent = float(np.polyfit(logp, np.log(np.maximum(max_abs, floor)), 1)[0])
    else:
        exponent = float("nan")
    return GrowthReport(radii, max_abs, max_ratio, exponent, k)


def area_cocycle(model: SymmetricSpaceModel, order: Optional[int] = None) -> GroupCochain:
    """J of the invariant area form on a 2-dimensional model."""
    from .geom import volume_form

    if model.dim != 2:
        raise ValueError("area cocycle needs a 2-dimensional model")
    q = QuadratureRule(2, order or (1 if model.is_euclidean else 120))
    return j_map(volume_form(model), model, q)


__all__ = [
    "GroupCochain", "GrowthReport", "area_cocycle", "constant_cochain", "cyclic_rotate",
    "cyclic_symmetrize", "delta", "growth_profile", "j_map", "vanest_form",
]

