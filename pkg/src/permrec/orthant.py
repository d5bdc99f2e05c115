"""Gaussian upper-orthant probabilities Q_K(t) = Pr(V >= t), V ~ N(0, K)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import ndtr, ndtri, owens_t

from .errors import CovarianceError, DimensionError, NumericError
from .estimate import DEFAULT_LEVEL, Estimate, Moments
from .model import cholesky_checked
from .rng import Stream, as_stream, map_blocks

BLOCK = 1 << 16
# cap on floats materialised per chunk when evaluating many thresholds at once
_CHUNK_FLOATS = 1 << 22


@dataclass(frozen=True, eq=False)
class OrthantQuery:
    K: np.ndarray
    t: np.ndarray
    samples: int = 10**5
    rng: Stream = field(default_factory=lambda: Stream(0))

    def __post_init__(self):
        K = np.atleast_2d(np.asarray(self.K, dtype=float))
        t = np.atleast_1d(np.asarray(self.t, dtype=float))
        if K.shape[0] < 1 or t.shape != (K.shape[0],):
            raise DimensionError(f"threshold shape {t.shape} does not match K {K.shape}")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "rng", as_stream(self.rng))
        object.__setattr__(self, "_chol", cholesky_checked(K, "orthant covariance"))

    @property
    def m(self) -> int:
        return self.K.shape[0]

    @property
    def cholesky(self) -> np.ndarray:
        return self._chol


def upper_orthant_1d(t, var=1.0):
    return ndtr(-np.asarray(t, dtype=float) / np.sqrt(var))


def upper_orthant_2d(t1, t2, rho):
    """Pr(V1 >= t1, V2 >= t2) for unit-variance V with correlation rho (vectorised).

    Uses the Owen's T representation of the bivariate normal CDF.
    """
    h, k, rho = np.broadcast_arrays(
        -np.asarray(t1, dtype=float), -np.asarray(t2, dtype=float), np.asarray(rho, dtype=float)
    )
    if np.any(np.abs(rho) >= 1):
        raise CovarianceError("bivariate correlation must satisfy |rho| < 1")
    s = np.sqrt((1.0 - rho) * (1.0 + rho))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ah = (k - rho * h) / (h * s)
        ak = (h - rho * k) / (k * s)
    ah = np.where(h == 0, np.copysign(np.inf, k), ah)
    ak = np.where(k == 0, np.copysign(np.inf, h), ak)
    diag = np.sqrt((1.0 - rho) / (1.0 + rho))
    both = (h == 0) & (k == 0)
    ah = np.where(both, diag, ah)
    ak = np.where(both, diag, ak)
    # sign product, not h * k, which underflows for tiny thresholds
    hk = np.sign(h) * np.sign(k)
    delta = np.where((hk < 0) | ((hk == 0) & (h + k < 0)), 0.5, 0.0)
    finite = np.isfinite(h) & np.isfinite(k)
    hf = np.where(finite, h, 0.0)
    kf = np.where(finite, k, 0.0)
    with np.errstate(invalid="ignore"):
        val = (
            0.5 * (ndtr(hf) + ndtr(kf))
            - owens_t(hf, np.where(finite, ah, 0.0))
            - owens_t(kf, np.where(finite, ak, 0.0))
            - delta
        )
    # infinite limits: CDF with a +inf argument reduces to the other marginal
    val = np.where(finite, val, 0.0)
    val = np.where(np.isposinf(h) & np.isfinite(k), ndtr(k), val)
    val = np.where(np.isposinf(k) & np.isfinite(h), ndtr(h), val)
    val = np.where(np.isposinf(h) & np.isposinf(k), 1.0, val)
    val = np.where(np.isneginf(h) | np.isneginf(k), 0.0, val)
    return np.clip(val, 0.0, 1.0)


def orthant_q_exact_2d(rho: float, t) -> float:
    """Quadrature oracle for the unit-variance bivariate upper orthant.

    Integrates phi(v) * Q((t2 - rho v) / sqrt(1 - rho^2)) over v >= t1.
    """
    if not abs(rho) < 1:
        raise CovarianceError(f"degenerate correlation rho={rho}")
    t1, t2 = (float(v) for v in t)
    if t1 == math.inf or t2 == math.inf:
        return 0.0
    if t2 == -math.inf:
        return float(ndtr(-t1))
    s = math.sqrt((1.0 - rho) * (1.0 + rho))

    def integrand(v):
        return math.exp(-0.5 * v * v) / math.sqrt(2.0 * math.pi) * ndtr((rho * v - t2) / s)

    pieces = [t1, math.inf] if t1 > -math.inf else [-math.inf, 0.0, math.inf]
    total = 0.0
    for a, b in zip(pieces[:-1], pieces[1:]):
        val, err = integrate.quad(integrand, a, b, epsabs=1e-13, epsrel=1e-12, limit=500)
        if err > 1e-10:
            raise NumericError(f"orthant quadrature error estimate {err:.2e} exceeds 1e-10")
        total += val
    return total


def orthant_exact(K: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Closed-form Q_K(t) for m in {1, 2}; rows of ``t`` and optional stack of K."""
    K = np.asarray(K, dtype=float)
    t = np.asarray(t, dtype=float)
    m = t.shape[-1]
    if m == 1:
        return upper_orthant_1d(t[..., 0], K[..., 0, 0])
    if m == 2:
        s0 = np.sqrt(K[..., 0, 0])
        s1 = np.sqrt(K[..., 1, 1])
        return upper_orthant_2d(t[..., 0] / s0, t[..., 1] / s1, K[..., 0, 1] / (s0 * s1))
    raise DimensionError(f"closed form only for dimensions 1 and 2, got {m}")


def orthant_hits(chol: np.ndarray, t: np.ndarray, samples: int, gen: np.random.Generator) -> np.ndarray:
    """Per-row hit fractions of ``samples`` draws V = L Z against thresholds ``t``.

    ``chol`` is one (m, m) factor or a stack (r, m, m) matching ``t`` of shape (r, m).
    """
    t = np.atleast_2d(t)
    r, m = t.shape
    out = np.empty(r)
    step = max(1, _CHUNK_FLOATS // (samples * m))
    for lo in range(0, r, step):
        hi = min(r, lo + step)
        z = gen.standard_normal((hi - lo, samples, m))
        L = chol if chol.ndim == 2 else chol[lo:hi]
        v = z @ np.swapaxes(L, -1, -2)
        out[lo:hi] = np.all(v >= t[lo:hi, None, :], axis=-1).mean(axis=1)
    return out


def orthant_q(
    q: OrthantQuery,
    exact: bool = False,
    method: str = "mc",
    level: float = DEFAULT_LEVEL,
    threads: int | None = None,
    replicates: int = 16,
) -> Estimate:
    """Estimate Pr(V >= t) for V ~ N(0, K).

    ``method="mc"`` is plain Monte Carlo in fixed blocks of counter-keyed
    substreams, so the draws (and hence coupled comparisons across
    thresholds or scalings) depend only on the stream and sample count.
    ``method="sobol"`` averages ``replicates`` independently scrambled Sobol
    sets. With ``exact=True`` dimensions 1 and 2 are answered in closed form.
    """
    if exact and q.m <= 2:
        return Estimate.exact(float(orthant_exact(q.K, q.t[None, :])[0]), seed=q.rng.seed)
    L = q.cholesky
    if method == "mc":

        def work(k, size):
            z = q.rng.generator(k).standard_normal((size, q.m))
            hits = np.all(z @ L.T >= q.t, axis=1)
            return Moments.of(hits)

        mom = Moments.merge_all(map_blocks(work, q.samples, BLOCK, threads))
        return Estimate.from_moments(mom.mean, mom.variance, mom.count, q.rng.seed, level, (0.0, 1.0))
    if method == "sobol":
        from scipy.stats import qmc

        power = max(1, math.ceil(math.log2(max(2, q.samples // replicates))))
        means = []
        for r in range(replicates):
            pts = qmc.Sobol(q.m, scramble=True, seed=q.rng.generator(r)).random_base2(power)
            z = ndtri(np.clip(pts, 1e-300, 1.0 - 1e-16))
            means.append(np.mean(np.all(z @ L.T >= q.t, axis=1)))
        means = np.asarray(means)
        var = means.var(ddof=1)
        return Estimate.from_moments(
            float(means.mean()), var, replicates, q.rng.seed, level, (0.0, 1.0),
            points=replicates * (1 << power),
        )
    raise ValueError(f"unknown orthant method {method!r}")
