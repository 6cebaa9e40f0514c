"""Riemannian logarithm on St(n, p) under the canonical metric.

Both routines work on a compressed orthogonal matrix of size ``p + k`` with
``k = min(p, n - p)``::

    V = [[M,     X0],
         [N_hat, Y0]]

where ``M = U0^T U1``, ``Q_hat N_hat`` is a QR factorization of the part of
``U1`` orthogonal to ``U0`` and ``[X0; Y0]`` is any completion to SO(p + k).
A geodesic from ``U0`` to ``U1`` corresponds to a rotation ``Phi`` of the
completion columns for which the lower right block of ``logm(V diag(I, Phi))``
vanishes.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.optimize

from . import matops
from ._search import golden_section
from .errors import DimensionMismatch, LogBranchBoundary, NoConvergence, NotSpecialOrthogonal
from .stiefel import TangentParam, canonical_inner

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100
DEFAULT_GRID = 4096
DEDUP_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class LogResult:
    tangent: TangentParam
    length: float
    iterations: int
    residual: float
    residual_history: tuple = field(default=())

    @property
    def monotone(self):
        """Whether the lower-right block norm decreased at every iteration."""
        h = self.residual_history
        return all(b <= a for a, b in zip(h, h[1:]))


@dataclass(frozen=True, eq=False)
class GeodesicCandidate:
    alpha: float
    tangent: TangentParam
    length: float
    block_residual: float


@dataclass(frozen=True, eq=False)
class _Compressed:
    V: np.ndarray
    basis: np.ndarray  # maps the k lower coordinates to Uperp coordinates
    p: int


def _compress(U0, U1):
    if (U0.n, U0.p) != (U1.n, U1.p):
        raise DimensionMismatch("points live on different Stiefel manifolds")
    n, p = U0.n, U0.p
    m = n - p
    M = U0.U.T @ U1.U
    N = U0.Uperp.T @ U1.U
    if m > p:
        basis, N_hat = np.linalg.qr(N)
        signs = np.sign(np.diag(N_hat))
        signs[signs == 0] = 1.0
        basis = basis * signs
        N_hat = N_hat * signs[:, None]
    else:
        basis = np.eye(m)
        N_hat = N
    top = np.vstack([M, N_hat])
    if top.shape[0] == p:
        V = top
    else:
        V, _ = matops.qr_complete(top)
        V[:, p:] = V[:, p:] @ _procrustes_rotation(V[p:, p:])
    return _Compressed(V, basis, p)


def _procrustes_rotation(Y):
    """Rotation ``Phi`` in SO(k) that makes ``Y Phi`` closest to the identity."""
    R, _, St = np.linalg.svd(Y)
    if np.linalg.det(R @ St) < 0:
        R = R.copy()
        R[:, -1] = -R[:, -1]
    return St.T @ R.T


def _nudge(k, angle=0.1):
    """Fixed small rotation in the (1, 2) plane of R^k (identity if k < 2)."""
    R = np.eye(k)
    if k >= 2:
        R[:2, :2] = _rotation(angle)
    return R


def _tangent_from_log(U0, comp, L):
    p = comp.p
    A = L[:p, :p]
    B = comp.basis @ L[p:, :p]
    return TangentParam(U0, A, B)


def _expm_skew(C):
    if C.shape == (2, 2):
        return _rotation(C[1, 0])
    return scipy.linalg.expm(C)


def _iterate(V, p, tol, max_iter):
    """Fixed-point rotation of the completion block until ``logm(V)`` has C = 0.

    Returns ``(L, V, iterations, history)``; raises ``NoConvergence``.
    """
    V = np.array(V, dtype=float)
    matops.logm_so(V)  # validates V once; the updates below keep it in SO
    history = []
    for it in range(1, max_iter + 1):
        L = matops.logm_so(V, check=False)
        C = L[p:, p:]
        r = math.sqrt(float(np.sum(C * C)))
        history.append(r)
        if r <= tol:
            return L, V, it, history
        V[:, p:] = V[:, p:] @ _expm_skew(-C)
    raise NoConvergence(
        f"lower right block norm {history[-1]:.3e} after {max_iter} iterations",
        iterations=max_iter,
        residual=history[-1],
    )


def stiefel_log(U0, U1, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Tangent ``Delta`` at ``U0`` with ``Exp_{U0}(Delta) = U1``.

    Raises ``NoConvergence`` when the iteration does not settle within
    ``max_iter`` steps and ``LogBranchBoundary`` when an intermediate
    orthogonal matrix has an eigenvalue at -1.
    """
    comp = _compress(U0, U1)
    V = comp.V
    try:
        matops.logm_so(V)
    except LogBranchBoundary:
        # symmetric configurations can put the start exactly on the -1 branch
        V = V.copy()
        V[:, comp.p:] = V[:, comp.p:] @ _nudge(V.shape[0] - comp.p)
        comp = _Compressed(V, comp.basis, comp.p)
    L, _, iterations, history = _iterate(comp.V, comp.p, tol, max_iter)
    tangent = _tangent_from_log(U0, comp, L)
    return LogResult(
        tangent=tangent,
        length=tangent.norm(),
        iterations=iterations,
        residual=history[-1],
        residual_history=tuple(history),
    )


def _rotation(alpha):
    c, s = math.cos(alpha), math.sin(alpha)
    return np.array([[c, -s], [s, c]])


def _wrap(alpha):
    return (alpha + math.pi) % (2.0 * math.pi) - math.pi


def _so2_log(V0, alpha):
    V = V0.copy()
    V[:, 2:] = V0[:, 2:] @ _rotation(alpha)
    return matops.logm_so(V, check=False)


def _so2_residual(V0, alpha):
    return matops.frob(_so2_log(V0, alpha)[2:, 2:])


def _so2_setup(U0, U1):
    if U0.p != 2:
        raise DimensionMismatch(f"the SO(2) scan needs p = 2, got p = {U0.p}")
    if U0.n < 4:
        raise DimensionMismatch(f"the SO(2) scan needs n >= 4, got n = {U0.n}")
    comp = _compress(U0, U1)
    if not matops.is_orthogonal(comp.V):
        raise NotSpecialOrthogonal("compressed matrix lost orthogonality")
    return comp


def so2_residual_profile(U0, U1, grid_size=DEFAULT_GRID):
    """Residual ``|C(alpha)|_F`` on a uniform grid over ``[-pi, pi)``.

    Returns ``(alphas, residuals)``; grid points where the logarithm hits
    the branch boundary carry ``nan``.
    """
    comp = _so2_setup(U0, U1)
    return _profile(comp.V, grid_size)


def _profile(V0, grid_size):
    alphas = -math.pi + 2.0 * math.pi * np.arange(grid_size) / grid_size
    res = np.empty(grid_size)
    for i, a in enumerate(alphas):
        try:
            res[i] = _so2_residual(V0, a)
        except LogBranchBoundary:
            res[i] = np.nan
    return alphas, res


def so2_scan(U0, U1, grid_size=DEFAULT_GRID, tol=DEFAULT_TOL):
    """Enumerate geodesics from ``U0`` to ``U1`` on St(n, 2) by sweeping Phi(alpha).

    For p = 2 the lower right block of ``logm(V diag(I, Phi(alpha)))`` is
    ``c(alpha) [[0, -1], [1, 0]]``. Each grid local minimum of ``|c|`` is
    refined, by Brent's method when ``c`` changes sign next to it and by
    golden-section search otherwise. Refined points with residual at most
    ``tol`` become candidates, returned sorted by length without duplicates.
    """
    comp = _so2_setup(U0, U1)
    V0 = comp.V
    alphas, res = _profile(V0, grid_size)
    step = 2.0 * math.pi / grid_size
    vals = np.where(np.isnan(res), np.inf, res)

    def signed(alpha):
        try:
            return _so2_log(V0, alpha)[3, 2]
        except LogBranchBoundary:
            return math.nan

    def r(alpha):
        c = signed(alpha)
        return math.inf if math.isnan(c) else abs(c) * math.sqrt(2.0)

    found = []
    for i in range(grid_size):
        if not np.isfinite(vals[i]):
            continue
        if vals[i] > vals[i - 1] or vals[i] > vals[(i + 1) % grid_size]:
            continue
        a0 = alphas[i]
        alpha = None
        for lo, hi in ((a0 - step, a0), (a0, a0 + step)):
            flo, fhi = signed(lo), signed(hi)
            if not (math.isnan(flo) or math.isnan(fhi)) and flo * fhi <= 0.0:
                alpha = scipy.optimize.brentq(signed, lo, hi, xtol=1e-15, rtol=1e-15)
                break
        if alpha is None:
            alpha, _ = golden_section(r, a0 - step, a0 + step, 1e-10)
        try:
            L = _so2_log(V0, alpha)
        except LogBranchBoundary:
            continue
        resid = matops.frob(L[2:, 2:])
        if resid > tol:
            continue
        tangent = _tangent_from_log(U0, comp, L)
        found.append(GeodesicCandidate(_wrap(alpha), tangent, tangent.norm(), resid))

    found.sort(key=lambda c: c.length)
    unique = []
    for cand in found:
        if all(_distance(cand.tangent, u.tangent) >= DEDUP_TOL for u in unique):
            unique.append(cand)
    return unique


def _distance(d1, d2):
    diff = d1 - d2
    return math.sqrt(max(canonical_inner(diff, diff), 0.0))
