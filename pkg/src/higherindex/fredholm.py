"""Finite graded Dirac models and the four index idempotents.

E = E+ (+) E- with dim E+ = p, dim E- = q, D+ : E+ -> E- a q x p matrix and
D- its adjoint.  Every projector is a (p + q) x (p + q) matrix in the block
order (E+, E-); the reference idempotent is e_1 = diag(0, I_q), so each
trace pairing Tr P - Tr e_1 is the index dim ker D+ - dim ker D-.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import IntegralityError, NotIdempotentError

PROJECTOR_TOL = 1e-9
INTEGRALITY_TOL = 1e-8
SERIES_CUTOFF = 1e-6
KERNEL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class GradedDirac:
    dplus: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.dplus)
        if d.ndim != 2:
            raise ValueError("D+ must be a q x p matrix")
        if not np.all(np.isfinite(d)):
            raise ValueError("D+ must have finite entries")
        object.__setattr__(self, "dplus", d)

    @classmethod
    def zero(cls, p: int, q: int) -> "GradedDirac":
        return cls(np.zeros((q, p)))

    @classmethod
    def random(cls, rng: np.random.Generator, p: int, q: int, rank: Optional[int] = None,
               scale: float = 1.0) -> "GradedDirac":
        """Gaussian D+ of the given rank (default: generic)."""
        r = min(p, q) if rank is None else rank
        d = rng.standard_normal((q, r)) @ rng.standard_normal((r, p)) if r else np.zeros((q, p))
        return cls(scale * d)

    @property
    def p(self) -> int:
        return self.dplus.shape[1]

    @property
    def q(self) -> int:
        return self.dplus.shape[0]

    @property
    def dminus(self) -> np.ndarray:
        return self.dplus.conj().T

    @property
    def full(self) -> np.ndarray:
        """The odd operator D = [[0, D-], [D+, 0]] on E+ (+) E-."""
        p, q = self.p, self.q
        out = np.zeros((p + q, p + q), dtype=self.dplus.dtype)
        out[:p, p:] = self.dminus
        out[p:, :p] = self.dplus
        return out

    def scaled(self, s: float) -> "GradedDirac":
        return GradedDirac(self.dplus * s)


@dataclass(frozen=True, eq=False)
class IndexProjector:
    matrix: np.ndarray
    tag: str
    p: int
    q: int

    def __post_init__(self):
        defect = idempotent_defect(self.matrix)
        if defect > PROJECTOR_TOL * max(1.0, np.linalg.norm(self.matrix, 2)):
            raise NotIdempotentError(f"{self.tag}: ||P^2 - P|| = {defect:.3e}")

    @property
    def e1(self) -> np.ndarray:
        return reference_idempotent(self.p, self.q)


def reference_idempotent(p: int, q: int) -> np.ndarray:
    e = np.zeros((p + q, p + q))
    e[p:, p:] = np.eye(q)
    return e


def idempotent_defect(m: np.ndarray) -> float:
    return float(np.linalg.norm(m @ m - m, 2)) if m.size else 0.0


# -- matrix functions ------------------------------------------------------

def hermitian_function(a: np.ndarray, f: Callable) -> np.ndarray:
    """f(A) for Hermitian A by eigendecomposition."""
    if a.size == 0:
        return a.copy()
    lam, v = np.linalg.eigh(a)
    lam = np.clip(lam, 0.0, None) if np.all(lam > -1e-12 * max(1.0, np.max(np.abs(lam)))) else lam
    return (v * f(lam)) @ v.conj().T


def phi1(x: np.ndarray) -> np.ndarray:
    """(1 - e^{-x}) / x with its removable singularity at 0 filled by the series."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < SERIES_CUTOFF
    safe = np.where(small, 1.0, x)
    series = 1.0 - x / 2.0 + x ** 2 / 6.0 - x ** 3 / 24.0
    return np.where(small, series, -np.expm1(-safe) / safe)


def default_u(y: np.ndarray) -> np.ndarray:
    """u(y) = (1 - e^{-y}) / y, so that w(x) = 1 - x^2 u(x^2) = e^{-x^2}."""
    return phi1(y)


def quartic_u(y: np.ndarray) -> np.ndarray:
    """u(y) = (1 - e^{-y^2}) / y, another admissible choice (w(x) = e^{-x^4})."""
    y = np.asarray(y, dtype=float)
    return y * phi1(y ** 2)


def pseudoinverse(dplus: np.ndarray, tol: float = KERNEL_TOL) -> np.ndarray:
    """Moore-Penrose inverse with singular values below ``tol`` treated as zero."""
    q, p = dplus.shape
    if dplus.size == 0:
        return np.zeros((p, q))
    u, s, vh = np.linalg.svd(dplus, full_matrices=False)
    inv = np.where(s > tol, 1.0 / np.where(s > tol, s, 1.0), 0.0)
    return (vh.conj().T * inv) @ u.conj().T


# -- projectors ------------------------------------------------------------

def _parametrix_projector(D: GradedDirac, Q: np.ndarray, tag: str) -> IndexProjector:
    """[[S+^2, S+(I+S+)Q], [S- D+, I - S-^2]] with S+ = I - Q D+, S- = I - D+ Q."""
    p, q = D.p, D.q
    dp = D.dplus
    Sp = np.eye(p) - Q @ dp
    Sm = np.eye(q) - dp @ Q
    dtype = np.result_type(dp, Q, float)
    P = np.zeros((p + q, p + q), dtype=dtype)
    P[:p, :p] = Sp @ Sp
    P[:p, p:] = Sp @ (np.eye(p) + Sp) @ Q
    P[p:, :p] = Sm @ dp
    P[p:, p:] = np.eye(q) - Sm @ Sm
    return IndexProjector(P, tag, p, q)


def cs_projector(D: GradedDirac, Q: Optional[np.ndarray] = None) -> IndexProjector:
    """Connes-Skandalis idempotent for a parametrix Q of D+ (default: pseudoinverse)."""
    Q = pseudoinverse(D.dplus) if Q is None else np.asarray(Q)
    if Q.shape != (D.p, D.q):
        raise ValueError(f"parametrix must be {D.p} x {D.q}")
    return _parametrix_projector(D, Q, "CS")


def cm_idempotent(D: GradedDirac) -> IndexProjector:
    """Connes-Moscovici idempotent built from the heat operators e^{-D-+ D+-}."""
    p, q = D.p, D.q
    dp, dm = D.dplus, D.dminus
    a = dm @ dp  # D- D+ on E+
    b = dp @ dm  # D+ D- on E-
    dtype = np.result_type(dp, float)
    V = np.zeros((p + q, p + q), dtype=dtype)
    V[:p, :p] = hermitian_function(a, lambda x: np.exp(-x))
    V[:p, p:] = hermitian_function(a, lambda x: np.exp(-0.5 * x) * phi1(x)) @ dm
    V[p:, :p] = hermitian_function(b, lambda x: np.exp(-0.5 * x)) @ dp
    V[p:, p:] = np.eye(q) - hermitian_function(b, lambda x: np.exp(-x))
    return IndexProjector(V, "CM", p, q)


def graph_projection(D: GradedDirac) -> IndexProjector:
    """Projection onto the graph of D+ (through (I + D- D+)^{-1})."""
    p, q = D.p, D.q
    dp, dm = D.dplus, D.dminus
    r = np.linalg.inv(np.eye(p) + dm @ dp)
    dtype = np.result_type(dp, float)
    e = np.zeros((p + q, p + q), dtype=dtype)
    e[:p, :p] = r
    e[:p, p:] = r @ dm
    e[p:, :p] = dp @ r
    e[p:, p:] = dp @ r @ dm
    return IndexProjector(e, "Graph", p, q)


def mw_projector(D: GradedDirac, u: Callable = default_u) -> IndexProjector:
    """Moscovici-Wu projector: the parametrix construction with Q = u(D- D+) D-.

    At finite dimension u only needs to be even with w(0) = 1; the Fourier
    support condition on u and w has no finite-dimensional content.
    """
    a = D.dminus @ D.dplus
    Q = hermitian_function(a, u) @ D.dminus
    return _parametrix_projector(D, Q, "MW")


def trace_pairing(P: IndexProjector, tol: float = INTEGRALITY_TOL) -> float:
    """Tr P - Tr e_1, checked to be an integer within ``tol``."""
    defect = idempotent_defect(P.matrix)
    if defect > PROJECTOR_TOL * max(1.0, np.linalg.norm(P.matrix, 2)):
        raise NotIdempotentError(f"{P.tag}: ||P^2 - P|| = {defect:.3e}")
    val = float(np.real(np.trace(P.matrix))) - P.q
    if abs(val - round(val)) > tol:
        raise IntegralityError(f"{P.tag} pairing {val!r} is not an integer within {tol}")
    return val


def all_projectors(D: GradedDirac, u: Callable = default_u) -> dict:
    return {"CS": cs_projector(D), "CM": cm_idempotent(D), "Graph": graph_projection(D),
            "MW": mw_projector(D, u)}


def mckean_singer(D: GradedDirac, t: float) -> float:
    """Supertrace Tr e^{-t D- D+} - Tr e^{-t D+ D-}."""
    a = D.dminus @ D.dplus
    b = D.dplus @ D.dminus
    la = np.linalg.eigvalsh(a) if a.size else np.zeros(0)
    lb = np.linalg.eigvalsh(b) if b.size else np.zeros(0)
    return float(np.sum(np.exp(-t * np.clip(la, 0, None))) - np.sum(np.exp(-t * np.clip(lb, 0, None))))


__all__ = [
    "GradedDirac", "IndexProjector", "all_projectors", "cm_idempotent", "cs_projector",
    "default_u", "graph_projection", "hermitian_function", "mckean_singer", "mw_projector",
    "phi1", "pseudoinverse", "quartic_u", "reference_idempotent", "trace_pairing",
]
