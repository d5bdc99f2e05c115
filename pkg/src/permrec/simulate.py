"""Error-probability estimators for permutation recovery with a linear decoder.

Two independent routes to the same number:

* :func:`pe_direct` simulates the channel ``Y = X + N`` and the decoder.
* :func:`pe_theorem1` averages a Gaussian orthant probability over the
  source, conditioned on the true ordering.

Their agreement within sampling error is the main consistency check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ContractError, CovarianceError, DimensionError
from .estimate import DEFAULT_LEVEL, Estimate, Moments
from .model import DecoderSpec, NoiseModel, decode_batch, in_cone, tridiag_cov
from .orthant import orthant_exact, orthant_hits
from .rng import Stream, fresh_seed, map_blocks
from .sources import SourceModel

DIRECT_BLOCK = 1 << 16
NESTED_BLOCK = 1 << 11

# stream keys, one per estimator family
KEY_DIRECT = 1
KEY_THEOREM1 = 2


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    source: SourceModel
    noise: NoiseModel
    n: int
    trials: int = 10**6
    seed: int | None = None
    decoder: DecoderSpec | None = None
    confidence_level: float = DEFAULT_LEVEL
    inner_orthant_samples: int = 1000
    #: answer 1- and 2-dimensional orthant probabilities in closed form
    exact_orthant: bool = False
    threads: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise DimensionError(f"n must be >= 1, got {self.n}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.noise.n != self.n:
            raise DimensionError(f"noise is {self.noise.n}-dimensional, n={self.n}")
        if self.decoder is None:
            object.__setattr__(self, "decoder", DecoderSpec.identity(self.n))
        elif self.decoder.n != self.n:
            raise DimensionError(f"decoder is {self.decoder.n}-dimensional, n={self.n}")
        if self.seed is None:
            object.__setattr__(self, "seed", fresh_seed())
        if self.inner_orthant_samples < 1:
            raise ValueError("inner_orthant_samples must be >= 1")

    def with_sigma(self, sigma: float) -> "ExperimentConfig":
        return replace(self, noise=NoiseModel.isotropic(sigma, self.n))


def _stream(cfg: ExperimentConfig, key: int, index: int) -> Stream:
    return Stream(cfg.seed, (key, index))


def pe_direct(cfg: ExperimentConfig, index: int = 0) -> Estimate:
    """Fraction of trials in which the decoded ordering fails to sort X.

    A trial counts as correct when the decoded permutation sorts X, which is
    the same as matching the stable sorting permutation except on ties.
    """
    stream = _stream(cfg, KEY_DIRECT, index)
    src, n, dec = cfg.source, cfg.n, cfg.decoder
    noiseless = cfg.noise.is_isotropic and cfg.noise.sigma == 0.0
    L = cfg.noise.cholesky

    def work(k, size):
        g = stream.generator(k)
        x = src.sample(g, (size, n))
        if noiseless:
            y = x
        elif cfg.noise.is_isotropic:
            y = x + cfg.noise.sigma * g.standard_normal((size, n))
        else:
            y = x + g.standard_normal((size, n)) @ L.T
        ok = in_cone(x, decode_batch(y, dec))
        return Moments.of(~ok)

    mom = Moments.merge_all(map_blocks(work, cfg.trials, DIRECT_BLOCK, cfg.threads))
    return Estimate.from_moments(
        mom.mean, mom.variance, mom.count, cfg.seed, cfg.confidence_level, (0.0, 1.0)
    )


def _pair_cov(M: np.ndarray, order: np.ndarray) -> np.ndarray:
    """Stack of T_pi M T_pi^T for the 0-based orders in ``order`` (r, n)."""
    Ms = M[order[:, :, None], order[:, None, :]]
    return Ms[:, 1:, 1:] - Ms[:, 1:, :-1] - Ms[:, :-1, 1:] + Ms[:, :-1, :-1]


def _perm_codes(order: np.ndarray) -> np.ndarray:
    n = order.shape[1]
    return order @ (n ** np.arange(n, dtype=np.int64))


def pe_theorem1(cfg: ExperimentConfig, permutations: str = "auto", index: int = 0) -> Estimate:
    """One minus the average orthant probability Q_{K_pi}(-T_pi A^{-1}(X - b)).

    ``permutations``:

    * ``"identity"``: condition on the identity ordering only (sorted draws).
      Valid when the summand does not depend on the ordering, which holds for
      isotropic noise with the identity decoder.
    * ``"sampled"``: draw X i.i.d. and condition on its own ordering, so the
      ordering is uniform over all n! and the estimate is unbiased for any
      invertible A and any K_N. Per-ordering means are reported in
      ``diagnostics``.
    * ``"auto"``: identity when that is valid, else sampled.

    The standard error is the sample standard deviation of the per-trial
    inner estimates over sqrt(trials); it covers both outer and inner noise.
    """
    src, n, dec, noise = cfg.source, cfg.n, cfg.decoder, cfg.noise
    invariant = noise.is_isotropic and dec.is_identity
    if permutations == "auto":
        permutations = "identity" if invariant else "sampled"
    if permutations not in ("identity", "sampled"):
        raise ValueError(f"unknown permutations mode {permutations!r}")
    if permutations == "identity" and not invariant:
        raise ContractError("single-ordering evaluation needs isotropic noise and the identity decoder")
    if n == 1:
        return Estimate.exact(0.0, cfg.trials, cfg.seed)

    stream = _stream(cfg, KEY_THEOREM1, index)
    m = n - 1
    M = dec.A_inv @ noise.covariance @ dec.A_inv.T
    use_exact = cfg.exact_orthant and m <= 2
    inner = cfg.inner_orthant_samples
    if permutations == "identity":
        if noise.sigma == 0.0:
            return Estimate.exact(0.0, cfg.trials, cfg.seed)
        k_id = noise.sigma**2 * tridiag_cov(n)
        chol_id = np.linalg.cholesky(k_id)

    def work(k, size):
        g = stream.generator(k)
        x = src.sample(g, (size, n))
        if permutations == "identity":
            x.sort(axis=1)
            order = None
            t = x[:, :-1] - x[:, 1:]
            kt = k_id
            chol = chol_id
        else:
            order = np.argsort(x, axis=1, kind="stable")
            u = np.take_along_axis(dec.transform(x), order, axis=1)
            t = u[:, :-1] - u[:, 1:]
            kt = _pair_cov(M, order)
            chol = None
        if use_exact:
            q = orthant_exact(kt, t)
        else:
            if chol is None:
                try:
                    chol = np.linalg.cholesky(kt)
                except np.linalg.LinAlgError as exc:
                    raise CovarianceError("projected noise covariance is singular") from exc
            q = orthant_hits(chol, t, inner, g)
        per_perm = None
        if order is not None and n <= 6:
            codes, inv = np.unique(_perm_codes(order), return_inverse=True)
            per_perm = (codes, np.bincount(inv, weights=q), np.bincount(inv))
        return Moments.of(q), per_perm

    parts = map_blocks(work, cfg.trials, NESTED_BLOCK, cfg.threads)
    mom = Moments.merge_all(p[0] for p in parts)
    diagnostics = {}
    if permutations == "sampled" and parts[0][1] is not None:
        sums: dict[int, list[float]] = {}
        for _, (codes, s, c) in parts:
            for code, si, ci in zip(codes.tolist(), s.tolist(), c.tolist()):
                acc = sums.setdefault(code, [0.0, 0])
                acc[0] += si
                acc[1] += ci
        means = np.array([1.0 - s / c for s, c in sums.values()])
        diagnostics = {
            "permutations_seen": len(sums),
            "per_permutation_spread": float(means.std()) if len(means) > 1 else 0.0,
        }
    return Estimate.from_moments(
        1.0 - mom.mean,
        mom.variance,
        mom.count,
        cfg.seed,
        cfg.confidence_level,
        (0.0, 1.0),
        permutations=permutations,
        inner_samples=None if use_exact else inner,
        **diagnostics,
    )


def pe_isotropic(cfg: ExperimentConfig, index: int = 0) -> Estimate:
    """Isotropic-noise specialisation: covariance sigma^2 * tridiag, one ordering."""
    if not cfg.noise.is_isotropic:
        raise ContractError("pe_isotropic needs isotropic noise")
    if not cfg.decoder.is_identity:
        raise ContractError("pe_isotropic needs the identity decoder; use pe_theorem1")
    return pe_theorem1(cfg, permutations="identity", index=index)


def pe_limit_high(n: int) -> float:
    """1 - 1/n!, the error probability of a blind guess."""
    if n < 1:
        raise DimensionError("n must be >= 1")
    if n > 170:
        return -math.expm1(-math.lgamma(n + 1))
    return 1.0 - 1.0 / math.factorial(n)


@dataclass(frozen=True)
class SweepRow:
    sigma: float
    estimate: Estimate
    pe_over_sigma: float
    gap_times_sigma: float
    n: int
    method: str = field(default="isotropic")


ESTIMATORS = {"direct": pe_direct, "isotropic": pe_isotropic, "theorem1": pe_theorem1}


def sweep(cfg: ExperimentConfig, sigmas, method: str = "isotropic") -> list[SweepRow]:
    """One estimate per sigma, each on its own substream.

    Grid point k uses substream index k, so a one-point sweep reproduces the
    plain estimator call.
    """
    sigmas = [float(s) for s in sigmas]
    if not sigmas:
        raise ValueError("empty sigma grid")
    if any(not s > 0 for s in sigmas):
        raise ValueError("sigma grid values must be positive")
    if not cfg.noise.is_isotropic:
        raise ContractError("sweeps are over isotropic noise levels")
    try:
        fn = ESTIMATORS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}") from None
    limit = pe_limit_high(cfg.n)
    rows = []
    for k, s in enumerate(sigmas):
        est = fn(cfg.with_sigma(s), index=k)
        rows.append(SweepRow(s, est, est.value / s, (limit - est.value) * s, cfg.n, method))
    return rows
