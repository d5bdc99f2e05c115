import math

import numpy as np
import pytest

from permrec import (
    CapabilityError,
    Custom,
    Exponential,
    StandardNormal,
    Stream,
    Uniform,
    expected_range,
    expected_spacings,
    parse_source,
    sample_iid,
    sample_sorted,
    subgaussian_range_bound,
)

BUILTIN = [Uniform(0.0, 1.0), Uniform(-2.0, 3.0), Exponential(0.5), Exponential(2.0), StandardNormal()]


@pytest.mark.parametrize("src", BUILTIN, ids=lambda s: s.label())
def test_quantile_roundtrip(src):
    u = (np.arange(1000) + 0.5) / 1000
    assert np.allclose(src.cdf(src.ppf(u)), u, atol=1e-8, rtol=0)
    assert np.allclose(src.density_at_quantile(u), src.pdf(src.ppf(u)))


def test_exponential_quantile_guard():
    assert np.isfinite(Exponential(1.0).ppf(1.0))


def test_sorted_matches_sorted_iid():
    for src in BUILTIN:
        a = sample_sorted(src, 5, 11, trials=200)
        b = np.sort(sample_iid(src, 5, 11, trials=200), axis=1)
        assert np.array_equal(a, b)


def test_parse_source():
    assert parse_source("uniform:0,1") == Uniform(0.0, 1.0)
    assert parse_source("exp:2") == Exponential(2.0)
    assert isinstance(parse_source("normal"), StandardNormal)
    for bad in ("cauchy", "uniform:x", "uniform:1,0", "exp:-1"):
        with pytest.raises(ValueError):
            parse_source(bad)


@pytest.mark.parametrize("src", [Uniform(-1.0, 1.0), StandardNormal(), Exponential(1.0)], ids=lambda s: s.label())
def test_spacings_telescope_and_symmetry(src):
    n = 5
    st = expected_spacings(src, n, trials=200_000, rng=Stream(3), exact=False)
    assert st.e_w.sum() == st.e_range
    if src.symmetric:
        for i in range(n - 1):
            j = n - 2 - i
            assert abs(st.e_w[i] - st.e_w[j]) <= 3 * math.hypot(st.e_w_se[i], st.e_w_se[j])


def test_closed_form_spacings():
    st = expected_spacings(Exponential(2.0), 4)
    assert np.allclose(st.e_w, [1 / 6, 1 / 4, 1 / 2])
    assert st.e_w.sum() == st.e_range
    assert np.allclose(expected_spacings(Uniform(0.0, 2.0), 3).e_w, [0.5, 0.5])


def test_range_modes():
    assert expected_range(Uniform(0.0, 1.0), 4) == pytest.approx(0.6)
    assert expected_range(Exponential(1.0), 4) == pytest.approx(1 + 1 / 2 + 1 / 3)
    assert expected_range(StandardNormal(), 2, "quadrature") == pytest.approx(2 / math.sqrt(math.pi), rel=1e-9)
    assert expected_range(Exponential(1.0), 4, "quadrature") == pytest.approx(11 / 6, rel=1e-8)
    with pytest.raises(CapabilityError):
        expected_range(StandardNormal(), 3)
    est = expected_range(StandardNormal(), 3, "monte_carlo", 100_000, Stream(5))
    assert abs(est.value - 3 / math.sqrt(math.pi)) <= 4 * est.std_error


def test_subgaussian_bound():
    assert subgaussian_range_bound(1.0, 2) == pytest.approx(2 * math.sqrt(2 * math.log(2)))
    with pytest.raises(ValueError):
        subgaussian_range_bound(1.0, 1)


def test_custom_source():
    lap = Custom(
        density=lambda x: 0.5 * np.exp(-np.abs(x)),
        cdf_fn=lambda x: np.where(x < 0, 0.5 * np.exp(x), 1 - 0.5 * np.exp(-x)),
        quantile=lambda u: np.where(u < 0.5, np.log(2 * u), -np.log(2 - 2 * u)),
        sampler=lambda g, size: g.laplace(size=size),
        sup_density=0.5,
        name="laplace",
    )
    u = np.linspace(0.01, 0.99, 99)
    assert np.allclose(lap.cdf(lap.ppf(u)), u)
    assert sample_iid(lap, 3, 0, trials=10).shape == (10, 3)
