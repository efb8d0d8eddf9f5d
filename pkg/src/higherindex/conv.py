"""Lattice convolution algebra on G = R^n and the cyclic cocycle tau^G_c.

Elements are arrays over the box {-R..R}^n of a lattice h Z^n (offset 0 sits
at the array center).  All integrals carry the Haar weight h^n.  With
``periodic=True`` the box is the finite group (Z / (2R+1))^n: sums wrap, and
cochains are evaluated at the centered representatives of group elements.
The periodic variant has plenty of honest idempotents (spectral projections
of circulant operators), which the torsion-free lattice lacks.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from ._accel import BACKEND, njit, pick
from .errors import BoxOverflowError


@dataclass(frozen=True)
class LatticeGroup:
    n: int
    spacing: float = 1.0
    radius: int = 8
    periodic: bool = False

    def __post_init__(self):
        if self.n < 1 or self.spacing <= 0 or self.radius < 0:
            raise ValueError("need n >= 1, spacing > 0 and radius >= 0")

    @property
    def side(self) -> int:
        return 2 * self.radius + 1

    @property
    def shape(self) -> tuple:
        return (self.side,) * self.n

    @property
    def haar(self) -> float:
        """Haar weight h^n of a lattice site."""
        return self.spacing ** self.n

    @property
    def offsets(self) -> np.ndarray:
        """Integer offsets of every site, shape (side,)*n + (n,)."""
        ax = np.arange(-self.radius, self.radius + 1)
        return np.stack(np.meshgrid(*([ax] * self.n), indexing="ij"), axis=-1)

    @property
    def coords(self) -> np.ndarray:
        return self.offsets * self.spacing

    def wrap(self, off):
        """Centered representative of integer offsets (periodic groups only)."""
        off = np.asarray(off)
        if not self.periodic:
            return off
        return (off + self.radius) % self.side - self.radius

    def zeros(self, dtype=float) -> "ConvElement":
        return ConvElement(self, np.zeros(self.shape, dtype=dtype))

    def unit(self) -> "ConvElement":
        """delta_0 / h^n, the unit of the discretized algebra."""
        v = np.zeros(self.shape)
        v[(self.radius,) * self.n] = 1.0 / self.haar
        return ConvElement(self, v)

    def delta(self, offset) -> "ConvElement":
        v = np.zeros(self.shape)
        idx = tuple(int(o) + self.radius for o in np.atleast_1d(offset))
        v[idx] = 1.0 / self.haar
        return ConvElement(self, v)

    def sample(self, f: Callable) -> "ConvElement":
        """Element with values f(coords) at every site."""
        return ConvElement(self, np.asarray(f(self.coords)))

    def gaussian(self, center=None, cov=None, mass: float = 1.0) -> "ConvElement":
        """Sampled normal density with the given center and covariance."""
        center = np.zeros(self.n) if center is None else np.asarray(center, dtype=float)
        cov = np.eye(self.n) if cov is None else np.atleast_2d(np.asarray(cov, dtype=float))
        inv = np.linalg.inv(cov)
        d = self.coords - center
        q = np.einsum("...i,ij,...j->...", d, inv, d)
        norm = mass / np.sqrt((2 * np.pi) ** self.n * np.linalg.det(cov))
        return ConvElement(self, norm * np.exp(-0.5 * q))


@dataclass(frozen=True, eq=False)
class ConvElement:
    group: LatticeGroup
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape != self.group.shape:
            raise ValueError(f"values must have shape {self.group.shape}, got {v.shape}")
        object.__setattr__(self, "values", v)

    def _check(self, other: "ConvElement"):
        if other.group != self.group:
            raise ValueError("elements live on different lattices")

    def __add__(self, other):
        self._check(other)
        return ConvElement(self.group, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return ConvElement(self.group, self.values - other.values)

    def __neg__(self):
        return ConvElement(self.group, -self.values)

    def __mul__(self, scalar):
        return ConvElement(self.group, self.values * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return convolve(self, other)

    def at(self, offset):
        idx = tuple(int(o) + self.group.radius for o in np.atleast_1d(offset))
        return self.values[idx]

    def support(self):
        """(offsets (N, n), values (N,)) of the nonzero sites."""
        nz = np.nonzero(self.values)
        off = np.stack(nz, axis=-1) - self.group.radius
        return off.astype(np.int64), self.values[nz]

    def support_box(self):
        """Per-axis (lo, hi) offsets of the support, or None for the zero element."""
        off, _ = self.support()
        if len(off) == 0:
            return None
        return off.min(axis=0), off.max(axis=0)

    def adjoint(self) -> "ConvElement":
        """a*(g) = conj a(-g)."""
        return ConvElement(self.group, np.conj(np.flip(self.values)))

    def norm_inf(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0


# -- convolution kernels ---------------------------------------------------

@njit
def _scatter_numba(ia, va, ib, vb, side, radius, periodic, out):
    n = ia.shape[1]
    for p in range(ia.shape[0]):
        for q in range(ib.shape[0]):
            idx = 0
            for d in range(n):
                o = ia[p, d] + ib[q, d]
                if periodic:
                    o = (o + radius) % side - radius
                idx = idx * side + (o + radius)
            out[idx] += va[p] * vb[q]
    return out


def _scatter_numpy(ia, va, ib, vb, side, radius, periodic, out):
    n = ia.shape[1]
    grid = out.reshape((side,) * n)
    if len(va) > len(vb):
        ia, va, ib, vb = ib, vb, ia, va
    for p in range(len(va)):
        off = ia[p] + ib
        if periodic:
            off = (off + radius) % side - radius
        np.add.at(grid, tuple((off + radius).T), va[p] * vb)
    return out


def _scatter(backend=None):
    return pick(_scatter_numba, _scatter_numpy, backend)


def _result_dtype(*arrays):
    return np.result_type(*arrays, np.float64)


def check_box(group: LatticeGroup, *elements: ConvElement):
    """Raise BoxOverflowError if the product support can leave the box."""
    if group.periodic:
        return
    lo = np.zeros(group.n, dtype=np.int64)
    hi = np.zeros(group.n, dtype=np.int64)
    for a in elements:
        box = a.support_box()
        if box is None:
            return
        lo += box[0]
        hi += box[1]
    if np.any(lo < -group.radius) or np.any(hi > group.radius):
        raise BoxOverflowError(
            f"product support [{lo.tolist()}, {hi.tolist()}] escapes the box of radius {group.radius}")


def convolve(a: ConvElement, b: ConvElement, backend: Optional[str] = None) -> ConvElement:
    """(a*b)(g) = sum_{g'} a(g') b(g - g') h^n."""
    a._check(b)
    g = a.group
    check_box(g, a, b)
    dtype = _result_dtype(a.values, b.values)
    out = np.zeros(g.side ** g.n, dtype=dtype)
    ia, va = a.support()
    ib, vb = b.support()
    if len(va) and len(vb):
        _scatter(backend)(ia, va.astype(dtype), ib, vb.astype(dtype), g.side, g.radius, g.periodic, out)
    return ConvElement(g, out.reshape(g.shape) * g.haar)


def plancherel_trace(a: ConvElement):
    """tau(a) = a(0)."""
    v = a.values[(a.group.radius,) * a.group.n]
    return v.item() if np.iscomplexobj(v) else float(v)


def seminorm(k: float, a: ConvElement) -> float:
    """nu_k(a) = (sum_g (1+|g|)^{2k} |a(g)|^2 h^n)^{1/2}."""
    L = np.linalg.norm(a.group.coords, axis=-1)
    return float(np.sqrt(np.sum((1.0 + L) ** (2 * k) * np.abs(a.values) ** 2) * a.group.haar))


# -- tau^G_c ---------------------------------------------------------------

def _lookup(a: ConvElement, off: np.ndarray) -> np.ndarray:
    """a at integer offsets (..., n); zero outside a non-periodic box."""
    g = a.group
    off = g.wrap(off)
    inside = np.all(np.abs(off) <= g.radius, axis=-1)
    idx = np.where(inside[..., None], off + g.radius, 0)
    vals = a.values[tuple(np.moveaxis(idx, -1, 0))]
    return np.where(inside, vals, 0)


@njit
def _area2_numba(i1, v1, i2, v2, a0, radius, side, periodic, h):
    total = 0.0 * v1[0] * v2[0] * a0[0, 0]
    for p in range(i1.shape[0]):
        gx = i1[p, 0]
        gy = i1[p, 1]
        for q in range(i2.shape[0]):
            Gx = gx + i2[q, 0]
            Gy = gy + i2[q, 1]
            if periodic:
                Gx = (Gx + radius) % side - radius
                Gy = (Gy + radius) % side - radius
            elif Gx < -radius or Gx > radius or Gy < -radius or Gy > radius:
                continue
            w = a0[(radius - Gx) % side, (radius - Gy) % side]
            total += 0.5 * (gx * Gy - gy * Gx) * h * h * w * v1[p] * v2[q]
    return total


def _area2_numpy(i1, v1, i2, v2, a0, radius, side, periodic, h):
    # c(0, g1, g1 + g2) = (g1 x (g1 + g2)) / 2 = (g1 x g2) / 2 reduces the double
    # sum to convolutions: sum_G a0(-G) [G_y (x a1 * a2)(G) - G_x (y a1 * a2)(G)] / 2
    n_pad = side if periodic else 2 * side - 1
    def grid(off, vals, weight=None):
        arr = np.zeros((n_pad, n_pad), dtype=np.result_type(vals, np.float64))
        w = vals if weight is None else vals * weight
        np.add.at(arr, (off[:, 0] % n_pad, off[:, 1] % n_pad), w)
        return arr
    f2 = np.fft.fft2(grid(i2, v2))
    cx = np.fft.ifft2(np.fft.fft2(grid(i1, v1, i1[:, 0])) * f2)
    cy = np.fft.ifft2(np.fft.fft2(grid(i1, v1, i1[:, 1])) * f2)
    freq = np.fft.fftfreq(n_pad, 1.0 / n_pad).round().astype(np.int64)
    Gx, Gy = np.meshgrid(freq, freq, indexing="ij")
    keep = (np.abs(Gx) <= radius) & (np.abs(Gy) <= radius)
    a0v = np.where(keep, a0[np.clip(radius - Gx, 0, side - 1), np.clip(radius - Gy, 0, side - 1)], 0)
    total = 0.5 * h * h * np.sum(a0v * (Gy * cx - Gx * cy))
    if not (np.iscomplexobj(v1) or np.iscomplexobj(v2) or np.iscomplexobj(a0)):
        total = total.real
    return total


def _area2(backend=None):
    return pick(_area2_numba, _area2_numpy, backend)


def _tau_area2(a0, a1, a2, backend=None):
    g = a0.group
    i1, v1 = a1.support()
    i2, v2 = a2.support()
    if len(v1) == 0 or len(v2) == 0:
        return 0.0
    dtype = _result_dtype(a0.values, a1.values, a2.values)
    val = _area2(backend)(i1, v1.astype(dtype), i2, v2.astype(dtype), a0.values.astype(dtype),
                          g.radius, g.side, g.periodic, float(g.spacing))
    return val * g.haar ** 2


def _tau_generic(c, elements: Sequence[ConvElement], chunk: int = 1 << 18):
    a0 = elements[0]
    g = a0.group
    k = len(elements) - 1
    supports = [a.support() for a in elements[1:]]
    if any(len(v) == 0 for _, v in supports):
        return 0.0
    sizes = [len(v) for _, v in supports]
    total = 0.0
    # enumerate the outer index explicitly and vectorize the remaining k-1 indices
    inner = np.indices(sizes[1:]).reshape(k - 1, -1).T if k > 1 else np.zeros((1, 0), dtype=np.int64)
    for start in range(0, len(inner), max(1, chunk // max(1, sizes[0]))):
        block = inner[start:start + max(1, chunk // max(1, sizes[0]))]
        idx = np.concatenate([np.repeat(np.arange(sizes[0]), len(block))[:, None],
                              np.tile(block, (sizes[0], 1))], axis=1)
        weight = np.ones(len(idx), dtype=_result_dtype(*[a.values for a in elements]))
        partial = np.zeros((len(idx), g.n), dtype=np.int64)
        args = [np.zeros((len(idx), g.n))]
        for j in range(k):
            off, vals = supports[j]
            partial = partial + off[idx[:, j]]
            weight = weight * vals[idx[:, j]]
            args.append(g.wrap(partial) * g.spacing)
        weight = weight * _lookup(a0, -partial)
        live = weight != 0
        if not np.any(live):
            continue
        cvals = np.asarray(c(*[x[live] for x in args]))
        total = total + np.sum(cvals * weight[live])
    return total * g.haar ** k


def tau_g(c, *elements: ConvElement, backend: Optional[str] = None, generic: bool = False):
    """tau^G_c(a_0..a_k) = sum c(e, g_1, .., g_1+..+g_k) a_0(-(g_1+..+g_k)) a_1(g_1)..a_k(g_k) h^{nk}.

    ``c`` must be cyclic.  Cochains tagged ``fast_kind="area2"`` use a
    dedicated kernel unless ``generic`` is set.
    """
    if len(elements) != c.degree + 1:
        raise ValueError(f"tau_g of a {c.degree}-cochain takes {c.degree + 1} elements")
    g = elements[0].group
    for a in elements[1:]:
        elements[0]._check(a)
    k = c.degree
    if k == 0:
        return np.asarray(c(np.zeros((1, g.n))))[0].item() * plancherel_trace(elements[0])
    if c.fast_kind == "area2" and not generic and g.n == 2 and k == 2:
        return _tau_area2(*elements, backend=backend)
    return _tau_generic(c, elements)


# -- Fourier side ----------------------------------------------------------

def _spectral_transform(a: ConvElement, pad: int):
    """f_hat(xi) = h^n sum_g a(g) e^{-i g.xi} and its xi-gradient on a P^n grid."""
    g = a.group
    off, vals = a.support()
    grid = np.zeros((pad,) * g.n, dtype=complex)
    np.add.at(grid, tuple((off % pad).T), vals)
    fh = np.fft.fftn(grid) * g.haar
    grads = []
    for d in range(g.n):
        gd = np.zeros_like(grid)
        np.add.at(gd, tuple((off % pad).T), -1j * off[:, d] * g.spacing * vals)
        grads.append(np.fft.fftn(gd) * g.haar)
    return fh, grads


def fourier_check(a0: ConvElement, a1: ConvElement, a2: ConvElement, c=None,
                  backend: Optional[str] = None):
    """(lattice tau_omega, spectral value) for the R^2 area cocycle.

    With f_hat(xi) = int f(x) e^{-i x.xi} dx the spectral integral
    int f0_hat df1_hat ^ df2_hat equals -8 pi^2 tau_omega(f0, f1, f2); the
    second number returned is that integral divided by -8 pi^2.  The
    derivatives are spectral (transforms of -i x_j f) and the xi-integral is
    the rectangle rule over a zero-padded Brillouin zone, which is exact for
    these trigonometric polynomials.
    """
    from .geom import Euclidean
    from .groupcoh import area_cocycle

    g = a0.group
    if g.n != 2 or g.periodic:
        raise ValueError("fourier_check needs a non-periodic lattice on R^2")
    c = c or area_cocycle(Euclidean(2))
    lattice = tau_g(c, a0, a1, a2, backend=backend)
    pad = 4 * g.radius + 2
    f0, _ = _spectral_transform(a0, pad)
    _, d1 = _spectral_transform(a1, pad)
    _, d2 = _spectral_transform(a2, pad)
    dxi = (2 * np.pi / (pad * g.spacing)) ** 2
    integral = np.sum(f0 * (d1[0] * d2[1] - d1[1] * d2[0])) * dxi
    spectral = integral / (-8.0 * np.pi ** 2)
    return float(np.real(lattice)), float(np.real(spectral))


# -- idempotents on the periodic lattice -----------------------------------

def symbol(a: ConvElement) -> np.ndarray:
    """Eigenvalues h^n sum_g a(g) e^{-i g.xi} of b -> a*b on a periodic lattice."""
    g = a.group
    return np.fft.fftn(np.fft.ifftshift(a.values)) * g.haar


def from_symbol(group: LatticeGroup, sym: np.ndarray, real: bool = True) -> ConvElement:
    v = np.fft.fftshift(np.fft.ifftn(sym)) / group.haar
    if real:
        v = v.real
    return ConvElement(group, v)


def spectral_idempotent(a: ConvElement, threshold: float = 0.5) -> ConvElement:
    """Projection onto the spectrum of the self-adjoint element a above ``threshold``."""
    g = a.group
    if not g.periodic:
        raise ValueError("spectral idempotents need a periodic lattice")
    lam = symbol(a)
    if np.max(np.abs(lam.imag)) > 1e-9 * max(1.0, np.max(np.abs(lam))):
        raise ValueError("element is not self-adjoint")
    mask = (lam.real > threshold).astype(float)
    real = bool(np.max(np.abs(a.values.imag)) == 0) if np.iscomplexobj(a.values) else True
    return from_symbol(g, mask, real=real)


# -- continuity probe ------------------------------------------------------

def random_decaying(group: LatticeGroup, rng: np.random.Generator, scale: float = 1.0,
                    decay: float = 2.0) -> ConvElement:
    """Random element with Gaussian envelope exp(-|g|^2 / (2 decay^2))."""
    env = np.exp(-0.5 * np.sum(group.coords ** 2, axis=-1) / decay ** 2)
    return ConvElement(group, scale * rng.standard_normal(group.shape) * env)


def continuity_probe(c, radii: Sequence[int], p: float = 0.0, n: int = 2, spacing: float = 1.0,
                     samples: int = 20, seed: int = 0, decay: float = 2.0) -> dict:
    """Fitted constant C with |tau_c(a)| <= C prod nu_{p+k}(a_i), per box radius.

    A boundedness probe only: the constant should stay put as the box grows.
    """
    k = c.degree
    consts = []
    for r in radii:
        group = LatticeGroup(n, spacing, int(r))
        rng = np.random.default_rng([seed, int(r)])
        worst = 0.0
        for _ in range(samples):
            els = [random_decaying(group, rng, decay=decay) for _ in range(k + 1)]
            val = abs(tau_g(c, *els))
            denom = np.prod([seminorm(p + k, a) for a in els])
            worst = max(worst, val / denom)
        consts.append(worst)
    consts = np.asarray(consts)
    return {"radii": [int(r) for r in radii], "constants": consts.tolist(),
            "spread": float(np.max(consts) / np.min(consts) - 1.0) if np.min(consts) > 0 else float("inf"),
            "p": p}


__all__ = [
    "BACKEND", "ConvElement", "LatticeGroup", "check_box", "continuity_probe", "convolve",
    "fourier_check", "from_symbol", "plancherel_trace", "random_decaying", "seminorm",
    "spectral_idempotent", "symbol", "tau_g",
]
