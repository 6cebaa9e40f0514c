import math

import numpy as np
import pytest

from stiefel_injrad import logmap
from stiefel_injrad.errors import DimensionMismatch, NoConvergence
from stiefel_injrad.stiefel import (
    GeodesicSpec,
    StiefelPoint,
    canonical_inner,
    exp_tangent,
    max_curvature_direction,
    random_point,
    random_tangent,
    stiefel_exp,
)

TOL = logmap.DEFAULT_TOL


def tangent_gap(d1, d2):
    diff = d1 - d2
    return math.sqrt(canonical_inner(diff, diff))


def test_log_of_start_is_zero():
    base = StiefelPoint.standard(5, 2)
    res = logmap.stiefel_log(base, base)
    assert res.length == 0.0
    assert res.iterations == 1


def test_log_on_the_circle():
    U0 = StiefelPoint.from_matrix(np.array([[1.0], [0.0]]))
    U1 = StiefelPoint.from_matrix(np.array([[0.0], [1.0]]))
    assert logmap.stiefel_log(U0, U1).length == pytest.approx(math.pi / 2, abs=1e-12)


def test_log_recovers_tangent():
    rng = np.random.default_rng(0)
    base = random_point(6, 3, rng)
    d = random_tangent(base, rng)
    res = logmap.stiefel_log(base, stiefel_exp(GeodesicSpec(base, d), 0.9))
    assert np.linalg.norm(res.tangent.A - 0.9 * d.A) < 1e-8
    assert np.linalg.norm(res.tangent.B - 0.9 * d.B) < 1e-8
    assert res.length == pytest.approx(res.tangent.norm(), abs=1e-12)
    assert res.residual <= TOL


@pytest.mark.parametrize("n,p", [(4, 2), (5, 1), (6, 3), (7, 2), (8, 5), (10, 4), (6, 6), (3, 2)])
def test_exp_log_roundtrips(n, p):
    rng = np.random.default_rng(n * 10 + p)
    for t in np.linspace(0.1, 2.0, 8):
        base = random_point(n, p, rng)
        d = random_tangent(base, rng)
        end = exp_tangent(d * t)
        res = logmap.stiefel_log(base, end)
        assert abs(res.length - t) < 1e-7
        assert np.linalg.norm(exp_tangent(res.tangent).U - end.U) < 10 * TOL
        assert res.monotone in (True, False)


def test_no_convergence_reports_iterations():
    base = StiefelPoint.standard(4, 2)
    end = exp_tangent(max_curvature_direction(base) * 2.87)
    with pytest.raises(NoConvergence) as info:
        logmap.stiefel_log(base, end, max_iter=5)
    assert info.value.iterations == 5


def test_shorter_geodesic_beyond_the_cut_point():
    base = StiefelPoint.standard(4, 2)
    end = exp_tangent(max_curvature_direction(base) * 3.0)
    res = logmap.stiefel_log(base, end, max_iter=1000)
    assert res.length < 3.0 - 1e-3
    assert np.linalg.norm(exp_tangent(res.tangent).U - end.U) < 1e-8


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        logmap.stiefel_log(StiefelPoint.standard(4, 2), StiefelPoint.standard(5, 2))


def test_so2_scan_finds_the_short_geodesic():
    rng = np.random.default_rng(1)
    base = StiefelPoint.standard(4, 2)
    end = exp_tangent(random_tangent(base, rng) * 0.5)
    cands = logmap.so2_scan(base, end)
    assert any(abs(c.length - 0.5) < 1e-6 for c in cands)
    assert cands[0].length == pytest.approx(0.5, abs=1e-6)


def test_so2_scan_of_start():
    base = StiefelPoint.standard(4, 2)
    cands = logmap.so2_scan(base, base)
    assert cands and cands[0].length == pytest.approx(0.0, abs=1e-9)


def test_so2_scan_beyond_cut_point():
    base = StiefelPoint.standard(4, 2)
    end = exp_tangent(max_curvature_direction(base) * 3.0)
    cands = logmap.so2_scan(base, end)
    assert len(cands) >= 2
    assert cands[0].length < 3.0
    assert any(abs(c.length - 3.0) < 1e-6 for c in cands)


@pytest.mark.parametrize("n,mu", [(4, 1.0), (4, 2.5), (5, 2.0), (6, 3.1)])
def test_so2_candidates_reach_the_endpoint(n, mu):
    rng = np.random.default_rng(n + int(10 * mu))
    base = StiefelPoint.standard(n, 2)
    end = exp_tangent(random_tangent(base, rng) * mu)
    cands = logmap.so2_scan(base, end)
    assert cands
    lengths = [c.length for c in cands]
    assert lengths == sorted(lengths)
    for c in cands:
        assert np.linalg.norm(exp_tangent(c.tangent).U - end.U) < 10 * TOL
        assert c.block_residual <= TOL
    for i, a in enumerate(cands):
        for b in cands[i + 1:]:
            assert tangent_gap(a.tangent, b.tangent) >= logmap.DEDUP_TOL


def test_so2_scan_needs_two_columns():
    with pytest.raises(DimensionMismatch):
        logmap.so2_scan(StiefelPoint.standard(5, 3), StiefelPoint.standard(5, 3))
    with pytest.raises(DimensionMismatch):
        logmap.so2_scan(StiefelPoint.standard(3, 2), StiefelPoint.standard(3, 2))


def test_residual_profile_shape():
    base = StiefelPoint.standard(4, 2)
    end = exp_tangent(max_curvature_direction(base) * 2.0)
    alphas, res = logmap.so2_residual_profile(base, end, grid_size=256)
    assert alphas.shape == res.shape == (256,)
    assert np.nanmin(res) < 0.1
