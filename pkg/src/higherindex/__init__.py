"""Numerical toolkit for higher index theory on proper cocompact actions.

Modules: ``geom`` (symmetric-space models), ``simplex`` (geodesic simplices and
quadrature), ``groupcoh`` (group cochains, van Est), ``proper`` (cut-off
functions), ``conv`` (lattice convolution algebra and group cyclic cocycles),
``cyclic`` (cyclic cohomology and Chern pairings), ``kernels`` (invariant
kernels and their cocycles), ``fredholm`` (index projectors), ``index``
(characteristic forms and the topological side), ``cli``.
"""
__version__ = "0.1.0"

from . import conv, cyclic, fredholm, geom, groupcoh, index, kernels, proper, simplex  # noqa: E402
from ._accel import BACKEND, HAVE_NUMBA  # noqa: E402
from .errors import HigherIndexError  # noqa: E402

__all__ = ["BACKEND", "HAVE_NUMBA", "HigherIndexError", "__version__", "conv", "cyclic", "fredholm",
           "geom", "groupcoh", "index", "kernels", "proper", "simplex"]
