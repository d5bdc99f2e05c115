import math

import numpy as np
import pytest

from permrec import (
    ContractError,
    Custom,
    DecoderSpec,
    ExperimentConfig,
    NoiseModel,
    StandardNormal,
    Uniform,
    pe_direct,
    pe_isotropic,
    pe_limit_high,
    pe_theorem1,
    sweep,
)
from permrec.estimate import combined_se


def cfg(sigma=0.3, n=3, trials=100_000, seed=1, **kw):
    return ExperimentConfig(Uniform(0.0, 1.0), NoiseModel.isotropic(sigma, n), n, trials, seed, **kw)


@pytest.mark.parametrize("threads", [2, 3])
def test_worker_count_independent(threads):
    base = cfg(trials=150_000)
    assert pe_direct(base) == pe_direct(ExperimentConfig(**{**base.__dict__, "threads": threads}))
    t1 = cfg(trials=5000, inner_orthant_samples=200)
    t2 = ExperimentConfig(**{**t1.__dict__, "threads": threads})
    assert pe_isotropic(t1) == pe_isotropic(t2)
    assert pe_theorem1(t1, "sampled") == pe_theorem1(t2, "sampled")


def test_same_seed_same_result_different_seed_differs():
    assert pe_direct(cfg(seed=5)) == pe_direct(cfg(seed=5))
    assert pe_direct(cfg(seed=5)).value != pe_direct(cfg(seed=6)).value


def test_routes_agree_isotropic():
    d = pe_direct(cfg(trials=400_000))
    i = pe_isotropic(cfg(trials=20_000, seed=2))
    s = pe_theorem1(cfg(trials=20_000, seed=3), "sampled")
    e = pe_theorem1(cfg(trials=20_000, seed=4, exact_orthant=True))
    for other in (i, s, e):
        assert abs(d.value - other.value) <= 4 * combined_se(d, other)
    assert e.std_error < i.std_error


def test_routes_agree_general():
    rng = np.random.default_rng(0)
    n = 3
    B = rng.normal(size=(n, n))
    K = 0.05 * (B @ B.T + np.eye(n))
    dec = DecoderSpec(np.eye(n) + 0.3 * rng.normal(size=(n, n)), rng.normal(size=n))
    base = dict(source=StandardNormal(), noise=NoiseModel.general(K), n=n, decoder=dec)
    d = pe_direct(ExperimentConfig(trials=400_000, seed=1, **base))
    t = pe_theorem1(ExperimentConfig(trials=20_000, seed=2, inner_orthant_samples=500, **base))
    assert abs(d.value - t.value) <= 4 * combined_se(d, t)
    assert t.diagnostics["permutations_seen"] == 6
    with pytest.raises(ContractError):
        pe_isotropic(ExperimentConfig(trials=10, seed=2, **base))
    with pytest.raises(ContractError):
        pe_theorem1(ExperimentConfig(trials=10, seed=2, **base), "identity")


def _relabelled(perm):
    def sampler(g, size):
        return Uniform(0.0, 1.0).sample(g, size)[..., perm]

    u = Uniform(0.0, 1.0)
    return Custom(u.pdf, u.cdf, u.ppf, sampler, sup_density=1.0, name=f"uniform{perm}")


def test_exchangeability():
    n = 4
    rng = np.random.default_rng(12)
    base = pe_direct(cfg(sigma=0.2, n=n, trials=200_000, seed=100))
    for k in range(5):
        perm = rng.permutation(n)
        c = ExperimentConfig(_relabelled(perm), NoiseModel.isotropic(0.2, n), n, 200_000, 101 + k)
        est = pe_direct(c)
        assert abs(est.value - base.value) <= 3 * combined_se(est, base)


def test_soft_monotonicity():
    rows = sweep(cfg(trials=10**6, seed=8), [0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0], method="direct")
    for a, b in zip(rows, rows[1:]):
        assert b.estimate.value >= a.estimate.value - 3 * combined_se(a.estimate, b.estimate)


def test_degenerate_cases():
    assert pe_direct(cfg(sigma=0.0)).value == 0.0
    assert pe_isotropic(cfg(sigma=0.0)).value == 0.0
    one = cfg(n=1, trials=1000)
    assert pe_direct(one).value == 0.0
    assert pe_theorem1(one).value == 0.0
    assert pe_limit_high(1) == 0.0
    assert pe_limit_high(3) == pytest.approx(5 / 6)
    assert pe_limit_high(200) == 1.0


def test_sweep_contract():
    c = cfg(trials=20_000, seed=3)
    rows = sweep(c, [0.2, 0.5])
    assert rows[0].estimate == pe_isotropic(c.with_sigma(0.2))
    assert rows[1].pe_over_sigma == rows[1].estimate.value / 0.5
    assert rows[1].gap_times_sigma == pytest.approx((5 / 6 - rows[1].estimate.value) * 0.5)
    for bad in ([], [0.1, 0.0], [-1.0]):
        with pytest.raises(ValueError):
            sweep(c, bad)


def test_confidence_interval_shape():
    est = pe_direct(cfg(trials=50_000))
    assert est.ci_low <= est.value <= est.ci_high
    assert est.ci_high - est.ci_low == pytest.approx(2 * 2.5758293 * est.std_error, rel=1e-6)
    assert est.std_error == pytest.approx(math.sqrt(est.value * (1 - est.value) / est.trials), rel=1e-3)
