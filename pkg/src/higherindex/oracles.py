"""Closed-form reference values used to cross-check the numerical routes.

Nothing here shares code with the quadrature or lattice paths it checks.
"""
import math

import numpy as np


def shoelace_area(p0, p1, p2):
    """Signed Euclidean area of the triangle (p0, p1, p2) in R^2."""
    p0, p1, p2 = (np.asarray(p, dtype=float) for p in (p0, p1, p2))
    a = p1 - p0
    b = p2 - p0
    return 0.5 * (a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0])


def gram_volume(points):
    """Signed volume of a Euclidean k-simplex in R^k: det(edges) / k!."""
    points = [np.asarray(p, dtype=float) for p in points]
    k = len(points) - 1
    edges = np.stack([p - points[0] for p in points[1:]], axis=-1)
    return np.linalg.det(edges) / math.factorial(k)


def _angle_at(p, a, b):
    """Interior angle at p of the hyperbolic triangle (p, a, b).

    The Moebius map z -> (z - p) / (z - conj p) sends p to the origin of the
    unit disk, where geodesics through p are straight rays.
    """
    wa = (a - p) / (a - np.conj(p))
    wb = (b - p) / (b - np.conj(p))
    return np.abs(np.angle(wb / wa))


def gauss_bonnet_area(z0, z1, z2):
    """Signed hyperbolic area pi - (A + B + C), positive for counterclockwise order."""
    z0, z1, z2 = (np.asarray(z, dtype=complex) for z in (z0, z1, z2))
    angles = _angle_at(z0, z1, z2) + _angle_at(z1, z2, z0) + _angle_at(z2, z0, z1)
    w1 = (z1 - z0) / (z1 - np.conj(z0))
    w2 = (z2 - z0) / (z2 - np.conj(z0))
    sign = np.sign(np.imag(w2 / w1))
    return sign * (np.pi - angles)


def gaussian_convolution_1d(x, var_a, var_b, mass_a=1.0, mass_b=1.0):
    """Convolution of two centered Gaussians with given masses and variances."""
    var = var_a + var_b
    return mass_a * mass_b * np.exp(-np.asarray(x) ** 2 / (2 * var)) / np.sqrt(2 * np.pi * var)


def fredholm_index_svd(dplus, tol=1e-10):
    """dim ker D+ - dim ker D- from the singular values of D+."""
    dplus = np.atleast_2d(np.asarray(dplus))
    q, p = dplus.shape
    s = np.linalg.svd(dplus, compute_uv=False) if dplus.size else np.zeros(0)
    rank = int(np.sum(s > tol))
    return (p - rank) - (q - rank)
