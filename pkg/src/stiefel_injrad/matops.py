"""Dense real matrix kernels.

Matrices are plain ``numpy.ndarray`` objects of dtype float64. All functions
are pure; none of them modify their arguments.
"""

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatch,
    LogBranchBoundary,
    NotSpecialOrthogonal,
    RankDeficient,
)

#: angular distance to -1 below which the principal logarithm is refused
BRANCH_TOL = 1e-6


def as_matrix(X, name="matrix"):
    """Return ``X`` as a finite 2-d float array, raising ``ValueError`` otherwise."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} has non-finite entries")
    return X


def _square(X, name):
    X = as_matrix(X, name)
    if X.shape[0] != X.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got {X.shape}")
    return X


def frob(X):
    return float(np.linalg.norm(X, "fro"))


def skew_part(X):
    X = np.asarray(X, dtype=float)
    return 0.5 * (X - X.T)


def is_skew(X, tol=1e-12):
    X = np.asarray(X, dtype=float)
    return frob(X + X.T) <= tol * max(1.0, frob(X))


def is_orthogonal(V, tol=1e-10):
    V = np.asarray(V, dtype=float)
    return frob(V.T @ V - np.eye(V.shape[1])) <= tol * max(1.0, frob(V))


def qr_complete(V):
    """QR factorization of an n-by-k matrix with an orthonormal completion.

    Returns ``(Q, R)`` with ``Q`` in SO(n) and ``R`` k-by-k upper triangular
    with nonnegative diagonal, such that ``Q[:, :k] @ R == V``. The trailing
    ``n - k`` columns of ``Q`` complete the column space of ``V``; the last
    column is negated if needed so that ``det(Q) = +1``.

    Raises ``RankDeficient`` when ``V`` does not have full column rank.
    """
    V = as_matrix(V, "V")
    n, k = V.shape
    if k > n:
        raise DimensionMismatch(f"qr_complete needs k <= n, got {V.shape}")
    sv = singular_values(V)
    if sv[0] == 0.0 or sv[-1] <= 1e-12 * sv[0]:
        raise RankDeficient(
            f"V has numerical rank < {k} (sigma_min/sigma_max = "
            f"{sv[-1] / sv[0] if sv[0] else 0.0:.3e})"
        )
    Q, R = np.linalg.qr(V, mode="complete")
    R = R[:k, :]
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    Q[:, :k] *= signs
    R *= signs[:, None]
    if np.linalg.det(Q) < 0:
        Q[:, -1] = -Q[:, -1]
        if k == n:
            R[-1, :] = -R[-1, :]
    return Q, R


def expm(X):
    """Matrix exponential (scaling and squaring, degree-13 Pade)."""
    X = _square(X, "X")
    return scipy.linalg.expm(X)


def logm_so(V, branch_tol=BRANCH_TOL, check=True):
    """Principal logarithm of a special orthogonal matrix.

    The real Schur form of an orthogonal matrix is block diagonal with
    1-by-1 blocks (+1 or -1) and 2-by-2 rotation blocks, so the logarithm is
    assembled block by block from rotation angles in (-pi, pi).

    Raises ``NotSpecialOrthogonal`` if ``V`` fails the orthogonality or
    determinant check, and ``LogBranchBoundary`` if some eigenvalue lies
    within ``branch_tol`` (in angle) of -1. ``check=False`` skips input
    validation for callers that maintain orthogonality themselves.
    """
    if check:
        V = _square(V, "V")
    n = V.shape[0]
    if check:
        scale = max(1.0, frob(V))
        if frob(V.T @ V - np.eye(n)) > 1e-10 * scale:
            raise NotSpecialOrthogonal("V^T V deviates from the identity")
        if abs(np.linalg.det(V) - 1.0) > 1e-8:
            raise NotSpecialOrthogonal("det(V) is not +1")

    T, Z = scipy.linalg.schur(V, output="real", check_finite=check)
    L = np.zeros_like(T)
    i = 0
    while i < n:
        if i + 1 < n and T[i + 1, i] != 0.0:
            c = 0.5 * (T[i, i] + T[i + 1, i + 1])
            s = 0.5 * (T[i + 1, i] - T[i, i + 1])
            theta = np.arctan2(s, c)
            if np.pi - abs(theta) < branch_tol:
                raise LogBranchBoundary(
                    f"rotation angle {theta:.12g} is within {branch_tol:g} of pi"
                )
            L[i + 1, i] = theta
            L[i, i + 1] = -theta
            i += 2
        else:
            if T[i, i] < 0.0:
                raise LogBranchBoundary("V has a real eigenvalue -1")
            i += 1
    S = Z @ L @ Z.T
    return skew_part(S)


def dexpm(X, Y):
    """Directional derivative of ``expm`` at ``X`` in direction ``Y``.

    Read off as the upper right block of ``expm([[X, Y], [0, X]])``.
    """
    X = _square(X, "X")
    Y = _square(Y, "Y")
    if X.shape != Y.shape:
        raise DimensionMismatch(f"X is {X.shape} but Y is {Y.shape}")
    n = X.shape[0]
    big = np.zeros((2 * n, 2 * n))
    big[:n, :n] = X
    big[n:, n:] = X
    big[:n, n:] = Y
    return scipy.linalg.expm(big)[:n, n:]


def singular_values(M):
    """Singular values of ``M`` in nonincreasing order (length ``min(m, k)``)."""
    M = as_matrix(M, "M")
    if M.size == 0:
        return np.zeros(0)
    return np.linalg.svd(M, compute_uv=False)
