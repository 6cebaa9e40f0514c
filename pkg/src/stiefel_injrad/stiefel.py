"""Points, tangent vectors and geodesics of St(n, p) under the canonical metric.

A tangent vector at ``U`` is stored through its horizontal coordinates
``(A, B)``: ``Delta = U A + U_perp B`` with ``A`` skew p-by-p and ``B`` of
size (n-p)-by-p. The canonical inner product is then
``0.5 * tr(A1^T A2) + tr(B1^T B2)`` and the geodesic through ``U`` reads
``[U, U_perp] expm(t * [[A, -B^T], [B, 0]]) [I_p; 0]``.
"""

from dataclasses import dataclass

import numpy as np

from . import matops
from .errors import DimensionMismatch, DimensionTooSmall, UnreachableRank

ORTHO_TOL = 1e-10


def _frozen(X):
    X = np.array(X, dtype=float, copy=True)
    X.setflags(write=False)
    return X


@dataclass(frozen=True, eq=False)
class StiefelPoint:
    """A point ``U`` with orthonormal columns and a fixed complement ``Uperp``.

    ``[U, Uperp]`` is orthogonal, and special orthogonal whenever p < n.
    """

    U: np.ndarray
    Uperp: np.ndarray

    def __post_init__(self):
        U = matops.as_matrix(self.U, "U")
        n, p = U.shape
        Uperp = np.asarray(self.Uperp, dtype=float).reshape(n, n - p)
        object.__setattr__(self, "U", _frozen(U))
        object.__setattr__(self, "Uperp", _frozen(Uperp))
        if matops.frob(U.T @ U - np.eye(p)) > ORTHO_TOL:
            raise ValueError("U does not have orthonormal columns")
        frame = self.frame
        if matops.frob(frame.T @ frame - np.eye(n)) > ORTHO_TOL * max(1.0, np.sqrt(n)):
            raise ValueError("[U, Uperp] is not orthogonal")
        if p < n and np.linalg.det(frame) < 0:
            raise ValueError("[U, Uperp] has determinant -1")

    @classmethod
    def from_matrix(cls, U):
        """Wrap ``U`` and compute an orthonormal complement for it."""
        U = matops.as_matrix(U, "U")
        n, p = U.shape
        if p == n:
            return cls(U, np.zeros((n, 0)))
        Q, _ = matops.qr_complete(U)
        return cls(U, Q[:, p:])

    @classmethod
    def standard(cls, n, p):
        """The base point ``[I_p; 0]`` with complement ``[0; I_{n-p}]``."""
        if not 1 <= p <= n:
            raise ValueError(f"need 1 <= p <= n, got n={n}, p={p}")
        eye = np.eye(n)
        return cls(eye[:, :p], eye[:, p:])

    @property
    def n(self):
        return self.U.shape[0]

    @property
    def p(self):
        return self.U.shape[1]

    @property
    def frame(self):
        return np.hstack([self.U, self.Uperp])

    def rotated(self, Q):
        """The point ``(Q U, Q Uperp)`` for an orthogonal ``Q``."""
        return StiefelPoint(Q @ self.U, Q @ self.Uperp)


@dataclass(frozen=True, eq=False)
class TangentParam:
    """Tangent vector at ``base`` in horizontal coordinates ``(A, B)``."""

    base: StiefelPoint
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        n, p = self.base.n, self.base.p
        A = np.asarray(self.A, dtype=float).reshape(p, p)
        B = np.asarray(self.B, dtype=float).reshape(n - p, p)
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
            raise ValueError("tangent coordinates must be finite")
        if not matops.is_skew(A):
            raise ValueError("A is not skew-symmetric")
        object.__setattr__(self, "A", _frozen(A))
        object.__setattr__(self, "B", _frozen(B))

    @classmethod
    def zero(cls, base):
        return cls(base, np.zeros((base.p, base.p)), np.zeros((base.n - base.p, base.p)))

    @property
    def omega(self):
        """The n-by-n horizontal lift ``[[A, -B^T], [B, 0]]``."""
        return horizontal_lift(self.A, self.B)

    def realization(self):
        """The ambient n-by-p matrix ``U A + Uperp B``."""
        return self.base.U @ self.A + self.base.Uperp @ self.B

    def norm(self):
        return float(np.sqrt(canonical_inner(self, self)))

    def normalized(self):
        nrm = self.norm()
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero tangent vector")
        return self * (1.0 / nrm)

    def _check(self, other):
        if not isinstance(other, TangentParam):
            return NotImplemented
        if (self.base.n, self.base.p) != (other.base.n, other.base.p):
            raise DimensionMismatch("tangent vectors live on different Stiefel manifolds")
        return None

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return TangentParam(self.base, self.A + other.A, self.B + other.B)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return TangentParam(self.base, self.A - other.A, self.B - other.B)

    def __mul__(self, c):
        return TangentParam(self.base, c * self.A, c * self.B)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0


@dataclass(frozen=True, eq=False)
class GeodesicSpec:
    """Unit-speed geodesic from ``start`` along ``direction`` for length ``length``."""

    start: StiefelPoint
    direction: TangentParam
    length: float = 1.0

    def __post_init__(self):
        if (self.direction.base.n, self.direction.base.p) != (self.start.n, self.start.p):
            raise DimensionMismatch("direction does not live at start")
        if abs(self.direction.norm() - 1.0) > 1e-10:
            raise ValueError(f"direction must have unit norm, got {self.direction.norm()!r}")
        if not self.length >= 0.0:
            raise ValueError("length must be nonnegative")

    @classmethod
    def from_tangent(cls, tangent, length=1.0):
        return cls(tangent.base, tangent.normalized(), float(length))


def horizontal_lift(A, B):
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    m = B.shape[0]
    return np.block([[A, -B.T], [B, np.zeros((m, m))]])


def canonical_inner(d1, d2):
    """Canonical metric ``0.5 tr(A1^T A2) + tr(B1^T B2)``."""
    if (d1.base.n, d1.base.p) != (d2.base.n, d2.base.p):
        raise DimensionMismatch("tangent vectors live on different Stiefel manifolds")
    return 0.5 * float(np.sum(d1.A * d2.A)) + float(np.sum(d1.B * d2.B))


def tangent_from_ambient(base, Delta):
    """Horizontal coordinates of an ambient tangent matrix ``Delta`` at ``base``."""
    Delta = np.asarray(Delta, dtype=float)
    A = matops.skew_part(base.U.T @ Delta)
    B = base.Uperp.T @ Delta
    return TangentParam(base, A, B)


def exp_tangent(tangent):
    """Riemannian exponential ``Exp_U(Delta)`` (geodesic at time 1)."""
    G = tangent.base.frame @ matops.expm(tangent.omega)
    p = tangent.base.p
    return StiefelPoint(G[:, :p], G[:, p:])


def stiefel_exp(spec, t):
    """Point ``gamma(t)`` on the geodesic described by ``spec``.

    The complement of the returned point is transported along with it, so
    its frame equals ``[U, Uperp] expm(t * Omega)``.
    """
    if t == 0:
        return spec.start
    return exp_tangent(spec.direction * float(t))


def geodesic_length(spec):
    return float(spec.length)


def random_point(n, p, rng):
    """Uniformly distributed point on St(n, p) from the QR of a Gaussian matrix."""
    if not 1 <= p <= n:
        raise ValueError(f"need 1 <= p <= n, got n={n}, p={p}")
    G = rng.standard_normal((n, p))
    Q, R = np.linalg.qr(G)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return StiefelPoint.from_matrix(Q * signs)


def random_tangent(base, rng):
    """Unit tangent with Gaussian ``A`` (skew part) and Gaussian ``B``."""
    p, m = base.p, base.n - base.p
    A = matops.skew_part(rng.standard_normal((p, p)))
    B = rng.standard_normal((m, p))
    return TangentParam(base, A, B).normalized()


def random_tangent_rank(base, j, rng):
    """Unit tangent whose ambient realization has rank exactly ``j``.

    For ``j <= n - p`` the tangent is ``Uperp G1 G2`` with Gaussian factors of
    inner size ``j`` and ``A = 0``. Otherwise ``A`` and ``B`` share a random
    (p - j)-dimensional kernel and are Gaussian on its complement.
    """
    n, p = base.n, base.p
    m = n - p
    if not 1 <= j <= p:
        raise UnreachableRank(f"rank {j} is outside 1..{p}")
    if j <= m:
        B = rng.standard_normal((m, j)) @ rng.standard_normal((j, p))
        tangent = TangentParam(base, np.zeros((p, p)), B)
    else:
        Z, _ = np.linalg.qr(rng.standard_normal((p, p)))
        P = Z[:, :j] @ Z[:, :j].T
        A = matops.skew_part(P @ rng.standard_normal((p, p)) @ P)
        B = rng.standard_normal((m, p)) @ P
        tangent = TangentParam(base, A, B)
    if tangent.norm() == 0.0:
        raise UnreachableRank(f"rank {j} is not reachable on St({n},{p})")
    tangent = tangent.normalized()
    sv = matops.singular_values(np.vstack([tangent.A, tangent.B]))
    ok = sv[j - 1] > 1e-8 * sv[0] and (j == len(sv) or sv[j] < 1e-10 * sv[0])
    if not ok:
        raise UnreachableRank(f"could not realize rank {j} on St({n},{p})")
    return tangent


def _require_max_curvature_dims(base):
    if base.p < 2 or base.n < base.p + 2:
        raise DimensionTooSmall(
            f"the maximal-curvature plane needs p >= 2 and n >= p + 2, "
            f"got n={base.n}, p={base.p}"
        )


def _padded_B(base, block):
    B = np.zeros((base.n - base.p, base.p))
    B[:2, :2] = block
    return B


def max_curvature_pair(base):
    """Orthonormal pair spanning a tangent plane of sectional curvature 5/4."""
    _require_max_curvature_dims(base)
    zero = np.zeros((base.p, base.p))
    r = 1.0 / np.sqrt(2.0)
    B1 = _padded_B(base, r * np.array([[0.0, 1.0], [1.0, 0.0]]))
    B2 = _padded_B(base, r * np.array([[1.0, 0.0], [0.0, -1.0]]))
    return TangentParam(base, zero, B1), TangentParam(base, zero, B2)


def max_curvature_direction(base):
    """Unit tangent with ``A = 0`` and ``B = 0.5 [[1, 1], [-1, 1]]`` (zero padded).

    This direction spans a maximal-curvature plane together with the
    tangent whose ``B`` block is ``0.5 [[1, -1], [1, 1]]``.
    """
    _require_max_curvature_dims(base)
    B = _padded_B(base, 0.5 * np.array([[1.0, 1.0], [-1.0, 1.0]]))
    return TangentParam(base, np.zeros((base.p, base.p)), B)


def tangent_basis(base):
    """Canonically orthonormal basis of the tangent space at ``base``.

    The skew part comes first (pairs ``i < j``), then the ``B`` unit
    matrices in row-major order. Its length is ``p(p-1)/2 + (n-p)p``.
    """
    n, p = base.n, base.p
    m = n - p
    zero_A = np.zeros((p, p))
    zero_B = np.zeros((m, p))
    basis = []
    for i in range(p):
        for j in range(i + 1, p):
            A = zero_A.copy()
            A[i, j] = 1.0
            A[j, i] = -1.0
            basis.append(TangentParam(base, A, zero_B))
    for k in range(m):
        for l in range(p):
            B = zero_B.copy()
            B[k, l] = 1.0
            basis.append(TangentParam(base, zero_A, B))
    return basis


def manifold_dimension(n, p):
    return p * (p - 1) // 2 + (n - p) * p
