import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permrec import OrthantQuery, Stream, orthant_q, orthant_q_exact_2d
from permrec.errors import CovarianceError, DimensionError
from permrec.orthant import orthant_exact, orthant_hits, upper_orthant_2d


def _cov(rho, s0=1.0, s1=1.0):
    return np.array([[s0 * s0, rho * s0 * s1], [rho * s0 * s1, s1 * s1]])


def test_negative_half_correlation_is_one_sixth():
    assert orthant_q_exact_2d(-0.5, [0.0, 0.0]) == pytest.approx(1 / 6, abs=1e-12)
    assert float(upper_orthant_2d(0.0, 0.0, -0.5)) == pytest.approx(1 / 6, abs=1e-15)
    est = orthant_q(OrthantQuery(_cov(-0.5) * 2, [0.0, 0.0], 200_000, Stream(1)))
    assert abs(est.value - 1 / 6) <= 4 * est.std_error


def test_zero_threshold_sheppard():
    for rho in (-0.9, -0.3, 0.0, 0.4, 0.95):
        ref = 0.25 + math.asin(rho) / (2 * math.pi)
        assert float(upper_orthant_2d(0.0, 0.0, rho)) == pytest.approx(ref, abs=1e-14)


@settings(max_examples=200, deadline=None)
@given(st.floats(-0.99, 0.99), st.floats(-4, 4), st.floats(-4, 4))
def test_owens_t_matches_quadrature(rho, t1, t2):
    assert float(upper_orthant_2d(t1, t2, rho)) == pytest.approx(orthant_q_exact_2d(rho, [t1, t2]), abs=1e-11)


def test_infinite_thresholds():
    assert float(upper_orthant_2d(-np.inf, 0.3, 0.2)) == pytest.approx(0.5 - 0.5 * math.erf(0.3 / math.sqrt(2)))
    assert float(upper_orthant_2d(np.inf, 0.3, 0.2)) == 0.0
    assert float(upper_orthant_2d(-np.inf, -np.inf, 0.2)) == 1.0
    assert orthant_q_exact_2d(0.2, [-np.inf, np.inf]) == 0.0


def test_exact_path_scales_variances():
    K = _cov(0.3, 2.0, 0.5)
    t = np.array([0.4, -0.1])
    assert float(orthant_exact(K, t)) == pytest.approx(orthant_q_exact_2d(0.3, [0.2, -0.2]), abs=1e-12)
    est = orthant_q(OrthantQuery(K, t), exact=True)
    assert est.std_error == 0.0


def test_monotone_in_threshold_coupled():
    K = _cov(0.4, 1.0, 1.5)
    prev = None
    for t1 in np.linspace(-2, 2, 9):
        est = orthant_q(OrthantQuery(K, [t1, 0.1], 20_000, Stream(9)))
        if prev is not None:
            assert est.value <= prev
        prev = est.value


@pytest.mark.parametrize("c", [0.25, 0.5, 2.0, 8.0])
def test_scaling_is_bit_exact(c):
    K = np.array([[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]]) * 0.3
    t = np.array([-0.2, 0.1, -0.4])
    a = orthant_q(OrthantQuery(K, t, 30_000, Stream(4)))
    b = orthant_q(OrthantQuery(c * c * K, c * t, 30_000, Stream(4)))
    assert a.value == b.value and a.std_error == b.std_error


def test_scaling_generic_factor_statistically():
    K = _cov(-0.2)
    a = orthant_q(OrthantQuery(K, [0.3, 0.2], 100_000, Stream(4)))
    b = orthant_q(OrthantQuery(3.7**2 * K, [3.7 * 0.3, 3.7 * 0.2], 100_000, Stream(4)))
    assert abs(a.value - b.value) <= 1e-4


def test_sobol_option():
    est = orthant_q(OrthantQuery(_cov(-0.5), [0.0, 0.0], 1 << 14, Stream(2)), method="sobol")
    assert abs(est.value - 1 / 6) <= max(4 * est.std_error, 1e-3)
    assert est.std_error < 2e-3


def test_hits_match_stacked_factor():
    K = _cov(0.1)
    L = np.linalg.cholesky(K)
    t = np.array([[0.0, 0.0], [0.5, -0.5]])
    a = orthant_hits(L, t, 500, np.random.default_rng(0))
    b = orthant_hits(np.stack([L, L]), t, 500, np.random.default_rng(0))
    assert np.array_equal(a, b)


def test_validation():
    with pytest.raises(CovarianceError):
        OrthantQuery(np.array([[1.0, 1.0], [1.0, 1.0]]), [0.0, 0.0])
    with pytest.raises(DimensionError):
        OrthantQuery(np.eye(2), [0.0, 0.0, 0.0])
    with pytest.raises(CovarianceError):
        orthant_q_exact_2d(1.0, [0.0, 0.0])
