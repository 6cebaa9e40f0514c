"""Sectional curvature of St(n, p) under the canonical metric."""

import numpy as np

from .errors import DegeneratePlane, DimensionMismatch
from .stiefel import canonical_inner

#: global upper bound on the sectional curvature
MAX_SECTIONAL_CURVATURE = 1.25


def _sq(X):
    return float(np.sum(X * X))


def curvature_numerator(d1, d2):
    """Numerator ``<R(X, Y) X, Y>`` of the sectional curvature, from (A, B) coordinates."""
    if (d1.base.n, d1.base.p) != (d2.base.n, d2.base.p):
        raise DimensionMismatch("tangent vectors live on different Stiefel manifolds")
    A1, B1, A2, B2 = d1.A, d1.B, d2.A, d2.B
    term1 = _sq(A1 @ A2 - A2 @ A1 + B2.T @ B1 - B1.T @ B2) / 8.0
    term2 = _sq(B1 @ A2 - B2 @ A1) / 4.0
    term3 = _sq(B1 @ B2.T - B2 @ B1.T) / 2.0
    return term1 + term2 + term3


def wedge_norm_sq(d1, d2):
    return canonical_inner(d1, d1) * canonical_inner(d2, d2) - canonical_inner(d1, d2) ** 2


def sectional_curvature(d1, d2, rel_tol=1e-12):
    """Sectional curvature of the plane spanned by ``d1`` and ``d2``.

    Raises ``DegeneratePlane`` when the two vectors are (numerically)
    linearly dependent.
    """
    wedge = wedge_norm_sq(d1, d2)
    scale = canonical_inner(d1, d1) * canonical_inner(d2, d2)
    if not wedge > rel_tol * scale:
        raise DegeneratePlane(f"|d1 ^ d2|^2 = {wedge:.3e} is too small relative to {scale:.3e}")
    return curvature_numerator(d1, d2) / wedge
