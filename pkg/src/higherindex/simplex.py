"""Geodesic simplices, simplex quadrature and integration of invariant forms.

The simplex spanned by points x_0..x_k is the iterated geodesic cone

    c(x_0..x_k)(u_1..u_k) = geod(x_0, c(x_1..x_k)(u_2..u_k), u_1),

with cone parameters u_i in [0, 1] and ``geod(x, y, u)`` the point at
fraction u of the geodesic from x to y.  In barycentric coordinates
u_1 = 1 - t_0 and the base coordinates are t_j / (1 - t_0), so t_0 = 1 is the
tip x_0 and t_0 = 0 the opposite face.  The map (u_1..u_k) -> (t_1..t_k) has
Jacobian u_1^(k-1) u_2^(k-2) ... > 0, so integrating in cone coordinates
keeps the orientation given by the vertex order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import DegenerateCoordinateError
from .geom import InvariantForm, SymmetricSpaceModel, volume_form

MAX_DEGREE = 4
FD_STEP = 1e-5


@lru_cache(maxsize=64)
def _gauss_legendre01(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def cone_to_barycentric(u: np.ndarray) -> np.ndarray:
    """Map cone parameters (..., k) to barycentric coordinates (..., k+1)."""
    u = np.asarray(u, dtype=float)
    k = u.shape[-1]
    t = np.ones(u.shape[:-1] + (1,))
    for j in range(k - 1, -1, -1):
        uj = u[..., j:j + 1]
        t = np.concatenate([1.0 - uj, uj * t], axis=-1)
    return t


@dataclass(frozen=True)
class QuadratureRule:
    """Collapsed tensor Gauss-Legendre rule on the standard k-simplex.

    ``order`` is the total polynomial degree integrated exactly on the simplex.
    The cube rule has ceil((order + k) / 2) points per cone parameter, enough
    to absorb the collapse Jacobian.
    """
    k: int
    order: int
    cube_nodes: np.ndarray = field(repr=False, compare=False, default=None)
    cube_weights: np.ndarray = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        if not 0 <= self.k <= MAX_DEGREE:
            raise ValueError(f"simplex degree must be in [0, {MAX_DEGREE}]")
        if self.order < 1:
            raise ValueError("quadrature order must be positive")
        if self.k == 0:
            nodes, weights = np.zeros((1, 0)), np.ones(1)
        else:
            m = max(1, -(-(self.order + self.k) // 2))
            x, w = _gauss_legendre01(m)
            grids = np.meshgrid(*([x] * self.k), indexing="ij")
            wgrids = np.meshgrid(*([w] * self.k), indexing="ij")
            nodes = np.stack([g.ravel() for g in grids], axis=-1)
            weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
        object.__setattr__(self, "cube_nodes", nodes)
        object.__setattr__(self, "cube_weights", weights)

    @property
    def n_points(self) -> int:
        return len(self.cube_weights)

    @property
    def nodes(self) -> np.ndarray:
        """Barycentric nodes on the standard simplex, shape (Q, k+1)."""
        return cone_to_barycentric(self.cube_nodes)

    @property
    def weights(self) -> np.ndarray:
        """Simplex weights (sum to 1/k!)."""
        jac = np.ones(len(self.cube_weights))
        for j in range(self.k):
            jac = jac * self.cube_nodes[:, j] ** (self.k - 1 - j)
        return self.cube_weights * jac

    def integrate(self, f) -> float:
        """Integrate f(t) over the simplex in the coordinates (t_1..t_k)."""
        return float(np.sum(self.weights * f(self.nodes)))


@dataclass(frozen=True)
class GeodesicSimplex:
    model: SymmetricSpaceModel
    vertices: tuple

    def __post_init__(self):
        k = len(self.vertices) - 1
        if not 0 <= k <= MAX_DEGREE:
            raise ValueError(f"simplex degree must be in [0, {MAX_DEGREE}]")
        verts = tuple(self.model.element(g) for g in self.vertices)
        object.__setattr__(self, "vertices", verts)

    @classmethod
    def from_points(cls, model: SymmetricSpaceModel, points: Sequence) -> "GeodesicSimplex":
        return cls(model, tuple(model.element_from_point(model.point(p)) for p in points))

    @property
    def degree(self) -> int:
        return len(self.vertices) - 1

    @property
    def points(self) -> list:
        return [self.model.orbit_point(g) for g in self.vertices]

    def translate(self, g) -> "GeodesicSimplex":
        return GeodesicSimplex(self.model, tuple(self.model.compose(g, v) for v in self.vertices))


def cone_chart(model: SymmetricSpaceModel, points: Sequence, u: np.ndarray):
    """Evaluate the iterated cone chart at cone parameters ``u`` (..., k)."""
    u = np.asarray(u, dtype=float)
    k = len(points) - 1
    if u.shape[-1] != k:
        raise ValueError(f"need {k} cone parameters, got {u.shape[-1]}")
    y = points[k]
    for j in range(k - 1, -1, -1):
        y = model.geodesic_point(points[j], y, u[..., j])
    return y


def cone_chart_jet(model: SymmetricSpaceModel, points: Sequence, u: np.ndarray):
    """Cone chart and its exact partial derivatives in u_1..u_k."""
    u = np.asarray(u, dtype=float)
    k = len(points) - 1
    y, tangents = points[k], []
    for j in range(k - 1, -1, -1):
        y, du, pushed = model.geodesic_jet(points[j], y, u[..., j], tangents)
        tangents = [du] + pushed
    return y, tangents


def simplex_point(s: GeodesicSimplex, t, strict: bool = False):
    """Point of the geodesic simplex at barycentric coordinates t."""
    t = np.asarray(t, dtype=float)
    k = s.degree
    if t.shape[-1] != k + 1:
        raise ValueError(f"need {k + 1} barycentric coordinates")
    if np.any(t < -1e-14) or np.any(np.abs(t.sum(axis=-1) - 1.0) > 1e-12):
        raise ValueError("barycentric coordinates must be nonnegative and sum to 1")
    if k == 0:
        return s.points[0]
    u = np.empty(t.shape[:-1] + (k,))
    rest = t
    for j in range(k):
        head, tail = rest[..., 0], rest[..., 1:]
        mass = 1.0 - head
        degenerate = np.abs(mass) < 1e-14
        if strict and np.any(degenerate):
            raise DegenerateCoordinateError("t_0 = 1 leaves the base coordinates undefined")
        u[..., j] = np.clip(mass, 0.0, 1.0)
        safe = np.where(degenerate, 1.0, mass)[..., None]
        # removable singularity: the base is evaluated at its barycenter
        rest = np.where(degenerate[..., None], 1.0 / tail.shape[-1], tail / safe)
    return cone_chart(s.model, s.points, u)


def _batched_points(model, points, extra_axes: int):
    """Append singleton node axes so vertex batches broadcast against nodes."""
    out = []
    for p in points:
        p = np.asarray(p)
        if model.is_euclidean:
            out.append(p.reshape(p.shape[:-1] + (1,) * extra_axes + p.shape[-1:]))
        else:
            out.append(p.reshape(p.shape + (1,) * extra_axes))
    return out


def integrate_form_points(alpha: InvariantForm, points: Sequence, q: QuadratureRule,
                          tangents: str = "analytic", step: float = FD_STEP,
                          richardson: bool = False) -> np.ndarray:
    """Signed integral of alpha over a batch of geodesic simplices.

    ``points`` is a sequence of k+1 vertex batches (any common batch shape).
    Euclidean charts are affine, so their tangents are the exact edge vectors.
    Otherwise the cone chart is differentiated exactly (``tangents="analytic"``,
    via geodesic Jacobi fields) or by central differences (``"fd"``, optional
    Richardson step).  Differences lose about half the digits once vertices
    are ~10 apart, which is why the analytic route is the default.
    """
    model = alpha.model
    k = len(points) - 1
    if alpha.degree != k:
        raise ValueError(f"form degree {alpha.degree} does not match simplex degree {k}")
    if q.k != k:
        raise ValueError(f"quadrature rule is for degree {q.k}, simplex has degree {k}")
    pts = _batched_points(model, points, 1)
    if k == 0:
        return np.asarray(alpha(points[0]), dtype=float)

    if model.is_euclidean:
        t = q.nodes
        x = sum(pts[j] * t[:, j:j + 1] for j in range(k + 1))
        edges = [np.broadcast_to(pts[j] - pts[0], x.shape) for j in range(1, k + 1)]
        vals = alpha(x, *edges)
        return np.sum(vals * q.weights, axis=-1)

    u = q.cube_nodes
    if tangents == "analytic":
        x, tans = cone_chart_jet(model, pts, u)
        vals = alpha(x, *tans)
        return np.sum(vals * q.cube_weights, axis=-1)
    if tangents != "fd":
        raise ValueError("tangents must be 'analytic' or 'fd'")
    x = cone_chart(model, pts, u)

    def tangent(j, h):
        hj = np.minimum(h, 0.5 * np.minimum(u[:, j], 1.0 - u[:, j]))
        up, um = u.copy(), u.copy()
        up[:, j] += hj
        um[:, j] -= hj
        return (cone_chart(model, pts, up) - cone_chart(model, pts, um)) / (2.0 * hj)

    tans = []
    for j in range(k):
        d = tangent(j, step)
        if richardson:
            d = (4.0 * tangent(j, 0.5 * step) - d) / 3.0
        tans.append(d)
    vals = alpha(x, *tans)
    return np.sum(vals * q.cube_weights, axis=-1)


def integrate_form(alpha: InvariantForm, s: GeodesicSimplex, q: QuadratureRule, **kw) -> float:
    return float(integrate_form_points(alpha, s.points, q, **kw))


def simplex_volume(s: GeodesicSimplex, q: QuadratureRule, **kw) -> float:
    if s.degree != s.model.dim:
        raise ValueError("volume needs a top-degree simplex")
    return abs(integrate_form(volume_form(s.model), s, q, **kw))
