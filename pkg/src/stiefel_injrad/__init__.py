"""Riemannian geometry of the Stiefel manifold St(n, p) under the canonical metric.

Exponential and logarithm maps, sectional curvature, Jacobi fields and
conjugate points, plus the cut-point experiments that probe the injectivity
radius (the explicit cut point of St(4, 2) sits at t1 ~ 2.8690968494).
"""

from .curvature import MAX_SECTIONAL_CURVATURE, sectional_curvature
from .errors import (
    DegeneratePlane,
    DimensionMismatch,
    DimensionTooSmall,
    LogBranchBoundary,
    NoConvergence,
    NoSignChange,
    NotSpecialOrthogonal,
    RankDeficient,
    StiefelError,
    UnreachableRank,
)
from .jacobi import T1_REFERENCE, conjugate_scan, jacobi_numeric, verify_explicit_cutpoint
from .logmap import so2_scan, stiefel_log
from .stiefel import (
    GeodesicSpec,
    StiefelPoint,
    TangentParam,
    canonical_inner,
    exp_tangent,
    max_curvature_pair,
    random_point,
    random_tangent,
    random_tangent_rank,
    stiefel_exp,
    tangent_basis,
)

__version__ = "0.1.0"
