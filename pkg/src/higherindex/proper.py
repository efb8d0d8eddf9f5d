"""Cut-off functions for the translation action of G = R^n on M = G x S.

The slice S is a finite weighted sample of a compact manifold, K is trivial,
and a point of M is a pair (y, s) with y in R^n and s an index into the
slice.  Haar measure on R^n is Lebesgue measure.

Two normalizations of a bump h are supported:

``continuum``
    chi = h / int_G h(g^-1 x) dg with the Haar integral computed by the
    trapezoid rule on h's support box.  Because G acts by translation the
    normalizer depends on the slice index only.
``lattice``
    chi = h / sum_lambda h(y - lambda, s) a^n over the lattice a Z^n.  This
    is exactly normalized for the lattice quadrature used by the kernel
    algebra (the normalizer is lattice periodic), and for bumps narrower than
    the spacing it restricts to the slice.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ZeroDenominatorError

NORMALIZER_FLOOR = 1e-12


@dataclass(frozen=True)
class ProperActionData:
    n: int
    slice_weights: np.ndarray
    lattice_spacing: float = 1.0

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.slice_weights, dtype=float))
        if w.size == 0:
            raise ValueError("slice must be nonempty")
        if np.any(w <= 0):
            raise ValueError("slice weights must be positive")
        if self.n < 1 or self.lattice_spacing <= 0:
            raise ValueError("need n >= 1 and positive lattice spacing")
        object.__setattr__(self, "slice_weights", w)

    @classmethod
    def point_slice(cls, n: int, lattice_spacing: float = 1.0) -> "ProperActionData":
        """M = G: the slice is a single point of weight 1."""
        return cls(n, np.ones(1), lattice_spacing)

    @property
    def slice_size(self) -> int:
        return len(self.slice_weights)

    @property
    def slice_volume(self) -> float:
        return float(self.slice_weights.sum())


def trapezoid_grid(n: int, radius: float, points_per_axis: int, center=None):
    """Tensor trapezoid nodes/weights on the cube [-radius, radius]^n (+ center)."""
    m = int(points_per_axis)
    x = np.linspace(-radius, radius, m)
    w = np.full(m, 2.0 * radius / (m - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    axes = np.meshgrid(*([x] * n), indexing="ij")
    waxes = np.meshgrid(*([w] * n), indexing="ij")
    nodes = np.stack([a.ravel() for a in axes], axis=-1)
    weights = np.prod(np.stack([a.ravel() for a in waxes], axis=-1), axis=-1)
    if center is not None:
        nodes = nodes + np.asarray(center, dtype=float)
    return nodes, weights


def _bump(r):
    """C-infinity radial bump, equal to 1 at r = 0 and supported in r < 1."""
    r = np.asarray(r, dtype=float)
    inside = r < 1.0
    safe = np.where(inside, r, 0.0)
    return np.where(inside, np.exp(1.0 - 1.0 / (1.0 - safe ** 2)), 0.0)


@dataclass(frozen=True)
class Cutoff:
    action: ProperActionData
    h: Callable
    support_radius: float
    normalizer: str = "continuum"
    points_per_axis: int = 101
    _norm: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.normalizer not in ("continuum", "lattice"):
            raise ValueError("normalizer must be 'continuum' or 'lattice'")
        if self.normalizer == "continuum":
            nodes, w = trapezoid_grid(self.action.n, self.support_radius, self.points_per_axis)
            norm = np.array([np.sum(w * self.h(nodes, np.full(len(w), s)))
                             for s in range(self.action.slice_size)])
            if np.any(norm < NORMALIZER_FLOOR):
                raise ZeroDenominatorError("int_G h(g^-1 x) dg vanishes; support of h too small")
            object.__setattr__(self, "_norm", norm)

    def normalizer_at(self, y, s):
        y = np.asarray(y, dtype=float)
        s = np.asarray(s, dtype=int)
        if self.normalizer == "continuum":
            return self._norm[s]
        a = self.action.lattice_spacing
        n = self.action.n
        reach = int(np.ceil(self.support_radius / a)) + 1
        offs = np.arange(-reach, reach + 1)
        grid = np.stack([g.ravel() for g in np.meshgrid(*([offs] * n), indexing="ij")], axis=-1) * a
        base = np.round(y / a) * a
        total = np.zeros(np.broadcast_shapes(y.shape[:-1], s.shape))
        for lam in grid:
            total = total + self.h(y - (base + lam), s)
        total = total * a ** n
        if np.any(total < NORMALIZER_FLOOR):
            raise ZeroDenominatorError("lattice normalizer vanishes; support of h too small")
        return total

    def __call__(self, y, s):
        y = np.asarray(y, dtype=float)
        s = np.asarray(s, dtype=int)
        hv = self.h(y, s)
        out = np.zeros(np.shape(hv))
        nz = hv != 0.0
        if np.any(nz):
            ys = np.broadcast_to(y, np.shape(hv) + y.shape[-1:])[nz]
            ss = np.broadcast_to(s, np.shape(hv))[nz]
            out[nz] = hv[nz] / self.normalizer_at(ys, ss)
        return out

    def quadrature(self, points_per_axis: Optional[int] = None):
        """Trapezoid nodes and weights over the G-support box."""
        return trapezoid_grid(self.action.n, self.support_radius, points_per_axis or self.points_per_axis)


def make_cutoff(h: Callable, action: ProperActionData, support_radius: float,
                normalizer: str = "continuum", points_per_axis: int = 101) -> Cutoff:
    """chi(x) = h(x) / int_G h(g^-1 x) dg."""
    return Cutoff(action, h, float(support_radius), normalizer, int(points_per_axis))


def bump_function(eps: float, center=None) -> Callable:
    """h_eps(y, s) = b(|y - center| / eps): 1 on the slice, 0 beyond distance eps."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    c = None if center is None else np.asarray(center, dtype=float)

    def h(y, s):
        y = np.asarray(y, dtype=float)
        if c is not None:
            y = y - c
        r = np.linalg.norm(y, axis=-1) / eps
        return _bump(r) * np.ones(np.shape(s))
    return h


def cutoff_family(eps: float, action: ProperActionData, normalizer: str = "continuum",
                  points_per_axis: int = 101) -> Cutoff:
    """chi_eps built from the radially rescaled bump h_eps."""
    return make_cutoff(bump_function(eps), action, eps, normalizer, points_per_axis)


def integrate_with_cutoff(chi: Cutoff, f: Callable, points_per_axis: Optional[int] = None) -> float:
    """int_M chi(x) f(x) dx over supp chi x S."""
    nodes, w = chi.quadrature(points_per_axis)
    total = 0.0
    for s, ws in enumerate(chi.action.slice_weights):
        sidx = np.full(len(w), s)
        total += ws * np.sum(w * chi(nodes, sidx) * f(nodes, sidx))
    return float(total)


def invariant_integral(density: Callable, chi: Cutoff, points_per_axis: Optional[int] = None) -> float:
    """int_M chi * density for a G-invariant density(y, s).

    For invariant densities the value depends only on the density, not on
    the cut-off.
    """
    return integrate_with_cutoff(chi, density, points_per_axis)


def normalization_defect(chi: Cutoff, xs, slices=None, spacing: Optional[float] = None) -> float:
    """max_x |int_G chi(g^-1 x) dg - 1| on a grid *not* aligned with x."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    slices = np.zeros(len(xs), dtype=int) if slices is None else np.asarray(slices, dtype=int)
    n = chi.action.n
    if chi.normalizer == "lattice":
        a = chi.action.lattice_spacing
        reach = int(np.ceil(chi.support_radius / a)) + 1
        offs = np.arange(-reach, reach + 1)
        lam = np.stack([g.ravel() for g in np.meshgrid(*([offs] * n), indexing="ij")], axis=-1) * a
        worst = 0.0
        for x, s in zip(xs, slices):
            base = np.round(x / a) * a
            vals = chi(x - (base + lam), np.full(len(lam), s))
            worst = max(worst, abs(vals.sum() * a ** n - 1.0))
        return worst
    step = spacing or 2.0 * chi.support_radius / (chi.points_per_axis - 1)
    worst = 0.0
    for x, s in zip(xs, slices):
        lo = np.floor((x - chi.support_radius) / step) - 1
        hi = np.ceil((x + chi.support_radius) / step) + 1
        axes = [np.arange(lo[i], hi[i] + 1) * step for i in range(n)]
        g = np.stack([a.ravel() for a in np.meshgrid(*axes, indexing="ij")], axis=-1)
        vals = chi(x - g, np.full(len(g), s))
        worst = max(worst, abs(vals.sum() * step ** n - 1.0))
    return worst
