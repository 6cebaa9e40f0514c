"""Jacobi fields along canonical geodesics and conjugate point detection.

A Jacobi field with ``J(0) = 0`` and initial covariant derivative ``W`` is
the differential of the exponential, ``J(t) = dExp_U(t Delta)[t W]``, which
on St(n, p) is the first ``p`` columns of
``[U, Uperp] Dexpm(t Omega)[t Omega_W]``.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import matops
from ._search import golden_section
from .errors import DimensionMismatch, NoSignChange
from .stiefel import GeodesicSpec, StiefelPoint, TangentParam, max_curvature_direction, tangent_basis

SQRT2 = math.sqrt(2.0)
#: first positive root of t -> (t / sqrt 2) cos(t / sqrt 2) + sin(t / sqrt 2)
T1_REFERENCE = 2.8690968494
DEFAULT_GRID = 2000
DEFAULT_TOL_REL = 1e-8


def cut_equation(t):
    """The function whose first positive root is the cut time on St(4, 2)."""
    s = t / SQRT2
    return s * math.cos(s) + math.sin(s)


@dataclass(frozen=True, eq=False)
class JacobiEvaluation:
    t: float
    field_values: list
    sigma_min: float
    sigma_max: float

    @property
    def ratio(self):
        return self.sigma_min / self.sigma_max if self.sigma_max > 0 else 0.0


def jacobi_numeric(spec, W, t):
    """Jacobi field along ``spec`` with initial derivative ``W``, evaluated at ``t``."""
    if (W.base.n, W.base.p) != (spec.start.n, spec.start.p):
        raise DimensionMismatch("W does not live at the geodesic's start point")
    t = float(t)
    D = matops.dexpm(t * spec.direction.omega, t * W.omega)
    return spec.start.frame @ D[:, : spec.start.p]


class SpectralJacobi:
    """Batched Jacobi fields along one geodesic for a fixed set of directions.

    ``Omega`` is skew, so ``i Omega`` is Hermitian and has a unitary
    eigenbasis ``Omega = V diag(lam) V^H`` with ``lam`` purely imaginary.
    The Frechet derivative of ``expm`` at ``t Omega`` is then
    ``V (G(t) * (V^H Y V)) V^H`` with ``G_ij = exp(t (lam_i + lam_j) / 2)
    sinc(t (w_i - w_j) / 2)``, which stays exact for repeated eigenvalues.
    """

    def __init__(self, spec, directions):
        self.spec = spec
        self.directions = list(directions)
        p = spec.start.p
        w, V = np.linalg.eigh(1j * spec.direction.omega)
        self._omega = -w  # Omega = V diag(i * omega) V^H
        self._V = V
        self._Vh_p = V.conj().T[:, :p]
        Wh = np.stack([V.conj().T @ d.omega @ V for d in self.directions])
        self._Wh = Wh

    def _kernel(self, t):
        om = self._omega
        mean = 0.5 * (om[:, None] + om[None, :])
        half_diff = 0.5 * t * (om[:, None] - om[None, :])
        return np.exp(1j * t * mean) * np.sinc(half_diff / np.pi)

    def fields(self, t):
        """Array of shape ``(d, n, p)`` with the fields in the start point's frame.

        Multiply by ``spec.start.frame`` on the left to get ambient values.
        """
        t = float(t)
        inner = self._kernel(t)[None, :, :] * (t * self._Wh)
        D = self._V[None, :, :] @ inner @ self._Vh_p[None, :, :]
        return D.real

    def ambient_fields(self, t):
        return self.spec.start.frame[None, :, :] @ self.fields(t)

    def singular_values(self, t):
        F = self.fields(t)
        M = F.reshape(F.shape[0], -1).T
        return matops.singular_values(M)

    def ratio(self, t):
        sv = self.singular_values(t)
        return sv[-1] / sv[0] if sv[0] > 0 else 0.0

    def evaluate(self, t):
        sv = self.singular_values(t)
        return JacobiEvaluation(
            t=float(t),
            field_values=list(self.ambient_fields(t)),
            sigma_min=float(sv[-1]),
            sigma_max=float(sv[0]),
        )


def st42_directions(base=None):
    """The five directions W1..W5 on St(4, 2) used for the closed forms."""
    base = StiefelPoint.standard(4, 2) if base is None else base
    zero = np.zeros((2, 2))
    return [
        TangentParam(base, np.array([[0.0, -1.0], [1.0, 0.0]]), zero),
        TangentParam(base, zero, np.array([[1.0, -1.0], [1.0, 1.0]])),
        TangentParam(base, zero, np.array([[1.0, 1.0], [-1.0, 1.0]])),
        TangentParam(base, zero, np.array([[1.0, 1.0], [1.0, -1.0]])),
        TangentParam(base, zero, np.array([[-1.0, 1.0], [1.0, 1.0]])),
    ]


def st42_geodesic(base=None):
    """Unit-speed geodesic on St(4, 2) with ``A = 0`` and ``B = 0.5 [[1, 1], [-1, 1]]``."""
    base = StiefelPoint.standard(4, 2) if base is None else base
    return GeodesicSpec(base, max_curvature_direction(base), T1_REFERENCE)


def st42_closed_forms(t):
    """Closed-form Jacobi fields J1..J5 at ``t`` along :func:`st42_geodesic`.

    Valid at the start point ``[I_2; 0]``.
    """
    t = float(t)
    s = math.sin(t / SQRT2)
    c = math.cos(t / SQRT2)
    a = 0.5 * (t * c + SQRT2 * s)
    b = t / (2.0 * SQRT2) * s
    ts = SQRT2 * t * s
    tc = t * c
    J1 = np.array([[0.0, -a], [a, 0.0], [b, -b], [b, b]])
    J2 = SQRT2 * s * np.array([[0.0, 0.0], [0.0, 0.0], [1.0, -1.0], [1.0, 1.0]])
    J3 = np.array([[-ts, 0.0], [0.0, -ts], [tc, tc], [-tc, tc]])
    J4 = np.array([[0.0, -ts], [-ts, 0.0], [tc, tc], [tc, -tc]])
    J5 = np.array([[ts, 0.0], [0.0, -ts], [-tc, tc], [tc, tc]])
    return [J1, J2, J3, J4, J5]


def conjugate_scan(spec, t_max, grid=DEFAULT_GRID, tol_rel=DEFAULT_TOL_REL):
    """Conjugate points along ``spec`` in ``(0, t_max]``.

    Stacks the Jacobi fields of a full tangent basis into an ``np x d``
    matrix ``M(t)`` and looks for zeros of ``sigma_min / sigma_max``: grid
    local minima are refined by golden-section search to width 1e-9 and
    reported when the refined ratio drops below ``tol_rel``. Returns a list
    of ``(t, multiplicity)`` sorted by ``t``.
    """
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    op = SpectralJacobi(spec, tangent_basis(spec.start))
    ts = t_max * np.arange(1, grid + 1) / grid
    ratios = np.array([op.ratio(t) for t in ts])
    h = t_max / grid

    hits = []
    for i in range(grid):
        left = ratios[i - 1] if i > 0 else np.inf
        right = ratios[i + 1] if i + 1 < grid else np.inf
        if ratios[i] > left or ratios[i] > right:
            continue
        lo = max(ts[i] - h, 0.5 * h)
        hi = min(ts[i] + h, t_max)
        t_star, r_star = golden_section(op.ratio, lo, hi, 1e-9)
        if r_star >= tol_rel:
            continue
        sv = op.singular_values(t_star)
        mult = int(np.sum(sv < tol_rel * sv[0]))
        hits.append((float(t_star), max(mult, 1)))

    hits.sort()
    merged = []
    for t_star, mult in hits:
        if merged and abs(t_star - merged[-1][0]) < 2 * h:
            continue
        merged.append((t_star, mult))
    return merged


def first_positive_root(f, bracket_hint, tol=1e-13, samples=10_000):
    """First sign change of ``f`` on ``bracket_hint``, located by bisection."""
    a, b = map(float, bracket_hint)
    xs = np.linspace(a, b, samples)
    prev_x, prev_f = xs[0], f(xs[0])
    if prev_f == 0.0:
        return float(prev_x)
    for x in xs[1:]:
        fx = f(x)
        if fx == 0.0:
            return float(x)
        if (fx > 0) != (prev_f > 0):
            lo, hi, flo = prev_x, x, prev_f
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                fm = f(mid)
                if fm == 0.0:
                    return float(mid)
                if (fm > 0) == (flo > 0):
                    lo, flo = mid, fm
                else:
                    hi = mid
            return float(0.5 * (lo + hi))
        prev_x, prev_f = x, fx
    raise NoSignChange(f"no sign change found on [{a}, {b}]")


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    threshold: float


@dataclass
class CutpointReport:
    t1: float
    checks: list

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def lines(self):
        out = [f"t1 = {self.t1:.10f}"]
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            out.append(f"{status} {c.name}: {c.measured:.3e} (threshold {c.threshold:.0e})")
        return out


def closed_form_residual(t):
    """``|J1(t) - (t1 / 4) J2(t)|_F`` with the reference cut time ``t1``."""
    J = st42_closed_forms(t)
    t1 = first_positive_root(cut_equation, (0.1, 4.0))
    return matops.frob(J[0] - 0.25 * t1 * J[1])


def verify_explicit_cutpoint(grid=DEFAULT_GRID):
    """Numerical verification of the explicit cut point on St(4, 2)."""
    spec = st42_geodesic()
    directions = st42_directions(spec.start)
    checks = []

    worst = 0.0
    for k in range(1, 46):
        t = 0.1 * k
        closed = st42_closed_forms(t)
        for W, J in zip(directions, closed):
            worst = max(worst, matops.frob(jacobi_numeric(spec, W, t) - J))
    checks.append(CheckResult("closed-form vs numeric Jacobi fields on t in (0, 4.5]", worst < 1e-8, worst, 1e-8))

    t1 = first_positive_root(cut_equation, (0.1, 4.0))
    err = abs(t1 - T1_REFERENCE)
    checks.append(CheckResult("first positive root t1 vs 2.8690968494", err < 1e-9, err, 1e-9))

    J = st42_closed_forms(t1)
    resid = matops.frob(J[0] - 0.25 * t1 * J[1])
    Jn = [jacobi_numeric(spec, W, t1) for W in directions[:2]]
    resid = max(resid, matops.frob(Jn[0] - 0.25 * t1 * Jn[1]))
    checks.append(CheckResult("J1(t1) - (t1/4) J2(t1) vanishes", resid < 1e-9, resid, 1e-9))

    hits = conjugate_scan(spec, 4.6, grid=grid)
    first = hits[0][0] if hits else math.inf
    gap = abs(first - t1)
    checks.append(CheckResult("first conjugate point found by scan equals t1", gap < 1e-6, gap, 1e-6))
    return CutpointReport(t1=t1, checks=checks)
