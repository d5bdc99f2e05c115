"""Source distributions for X and order-statistic utilities (spacings, range)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import ndtr, ndtri

from .errors import CapabilityError, DimensionError, NumericError
from .estimate import DEFAULT_LEVEL, Estimate
from .rng import Stream, as_stream, map_blocks

BLOCK = 1 << 16
_ONE_BELOW = np.nextafter(1.0, 0.0)


class SourceModel:
    """Interface for an i.i.d. source; subclasses are immutable."""

    name: str = "source"
    #: sup of the density, or None when unknown
    sup_density: float | None = None
    #: whether the density of X - X' is finite everywhere
    bounded_difference_density: bool = True

    def pdf(self, x):
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    def ppf(self, u):
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        raise NotImplementedError

    def density_at_quantile(self, u):
        """f(F^{-1}(u)) for u in (0, 1)."""
        return self.pdf(self.ppf(u))

    @property
    def symmetric(self) -> bool:
        return False

    def label(self) -> str:
        return self.name


@dataclass(frozen=True)
class Uniform(SourceModel):
    a: float = 0.0
    b: float = 1.0
    name = "uniform"

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"need a < b, got a={self.a}, b={self.b}")

    @property
    def sup_density(self) -> float:
        return 1.0 / (self.b - self.a)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.a) & (x <= self.b), 1.0 / (self.b - self.a), 0.0)

    def cdf(self, x):
        return np.clip((np.asarray(x, dtype=float) - self.a) / (self.b - self.a), 0.0, 1.0)

    def ppf(self, u):
        return self.a + (self.b - self.a) * np.asarray(u, dtype=float)

    def density_at_quantile(self, u):
        return np.full_like(np.asarray(u, dtype=float), 1.0 / (self.b - self.a))

    def sample(self, rng, size):
        return self.a + (self.b - self.a) * rng.random(size)

    @property
    def symmetric(self) -> bool:
        return True

    def label(self) -> str:
        return f"uniform:{self.a!r},{self.b!r}"


@dataclass(frozen=True)
class Exponential(SourceModel):
    rate: float = 1.0
    name = "exp"

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate}")

    @property
    def sup_density(self) -> float:
        return self.rate

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, self.rate * np.exp(-self.rate * np.maximum(x, 0.0)), 0.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, -np.expm1(-self.rate * np.maximum(x, 0.0)), 0.0)

    def ppf(self, u):
        u = np.minimum(np.asarray(u, dtype=float), _ONE_BELOW)
        return -np.log1p(-u) / self.rate

    def density_at_quantile(self, u):
        return self.rate * (1.0 - np.asarray(u, dtype=float))

    def sample(self, rng, size):
        return rng.standard_exponential(size) / self.rate

    def label(self) -> str:
        return f"exp:{self.rate!r}"


@dataclass(frozen=True)
class StandardNormal(SourceModel):
    name = "normal"
    sup_density = 1.0 / math.sqrt(2.0 * math.pi)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)

    def cdf(self, x):
        return ndtr(np.asarray(x, dtype=float))

    def ppf(self, u):
        return ndtri(np.asarray(u, dtype=float))

    def sample(self, rng, size):
        return rng.standard_normal(size)

    @property
    def symmetric(self) -> bool:
        return True


@dataclass(frozen=True)
class Custom(SourceModel):
    """User-supplied source.

    ``sampler(rng, size)`` must return i.i.d. draws (or exchangeable rows when
    only used by the Monte Carlo estimators). ``sup_density`` is the declared
    supremum of the density, ``None`` when unknown.
    """

    density: Callable = field(repr=False)
    cdf_fn: Callable = field(repr=False)
    quantile: Callable = field(repr=False)
    sampler: Callable = field(repr=False)
    sup_density: float | None = None
    bounded_difference_density: bool = True
    name: str = "custom"

    def pdf(self, x):
        return self.density(x)

    def cdf(self, x):
        return self.cdf_fn(x)

    def ppf(self, u):
        return self.quantile(u)

    def sample(self, rng, size):
        return np.asarray(self.sampler(rng, size), dtype=float)


def parse_source(text: str) -> SourceModel:
    """Parse ``uniform:a,b``, ``exp:lambda`` or ``normal``."""
    kind, _, args = text.strip().partition(":")
    kind = kind.lower()
    try:
        vals = [float(v) for v in args.split(",")] if args else []
    except ValueError as exc:
        raise ValueError(f"bad source parameters in {text!r}") from exc
    if kind == "uniform":
        return Uniform(*vals) if vals else Uniform()
    if kind in ("exp", "exponential"):
        return Exponential(*vals) if vals else Exponential()
    if kind in ("normal", "gaussian") and not vals:
        return StandardNormal()
    raise ValueError(f"unknown source {text!r}; use uniform:a,b, exp:lambda or normal")


def _generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return as_stream(rng).generator(0)


def sample_iid(src: SourceModel, n: int, rng, trials: int | None = None) -> np.ndarray:
    """``n`` i.i.d. draws, or a ``(trials, n)`` array of independent rows."""
    shape = (n,) if trials is None else (trials, n)
    return src.sample(_generator(rng), shape)


def sample_sorted(src: SourceModel, n: int, rng, trials: int | None = None) -> np.ndarray:
    """A draw of X conditioned on lying in the identity cone (sorted i.i.d. draw)."""
    return np.sort(sample_iid(src, n, rng, trials), axis=-1)


def subgaussian_range_bound(gamma_sq: float, n: float) -> float:
    """Upper bound ``2 sqrt(2 gamma^2 log n)`` on E[R_n] for gamma^2-sub-Gaussian X."""
    if gamma_sq <= 0 or n < 2:
        raise ValueError("need gamma_sq > 0 and n >= 2")
    return 2.0 * math.sqrt(2.0 * gamma_sq * math.log(n))


@dataclass(frozen=True, eq=False)
class SpacingStats:
    n: int
    e_w: np.ndarray
    e_range: float
    e_w_se: np.ndarray
    e_range_se: float
    trials: int
    #: covariance of the per-trial spacing vector (zeros for closed forms)
    w_cov: np.ndarray


def _closed_spacings(src: SourceModel, n: int) -> np.ndarray | None:
    if isinstance(src, Uniform):
        return np.full(n - 1, (src.b - src.a) / (n + 1))
    if isinstance(src, Exponential):
        # W_i ~ Exp(rate * (n - i))
        return 1.0 / (src.rate * (n - np.arange(1, n)))
    return None


def _spacing_sums(src, n, trials, stream, threads):
    def work(k, size):
        x = np.sort(src.sample(stream.generator(k), (size, n)), axis=1)
        w = np.diff(x, axis=1)
        return w.sum(0), w.T @ w

    parts = map_blocks(work, trials, BLOCK, threads)
    sw = sum(p[0] for p in parts)
    sww = sum(p[1] for p in parts)
    return sw, sww


def expected_spacings(
    src: SourceModel,
    n: int,
    trials: int = 10**6,
    rng: Stream | int | None = None,
    exact: bool = True,
    threads: int | None = None,
) -> SpacingStats:
    """E[W_i] for the spacings of n i.i.d. draws, plus E[R_n].

    Closed forms are used for uniform and exponential sources unless
    ``exact=False``; otherwise Monte Carlo with standard errors.
    """
    if n < 2:
        raise DimensionError("spacings need n >= 2")
    closed = _closed_spacings(src, n) if exact else None
    if closed is not None:
        zero = np.zeros(n - 1)
        return SpacingStats(n, closed, float(closed.sum()), zero, 0.0, 0, np.zeros((n - 1, n - 1)))
    stream = as_stream(rng)
    sw, sww = _spacing_sums(src, n, trials, stream, threads)
    e_w = sw / trials
    cov = (sww - trials * np.outer(e_w, e_w)) / (trials - 1)
    # the range is the telescoped sum of spacings, so take its moments from them
    var_r = float(cov.sum())
    return SpacingStats(
        n,
        e_w,
        float(e_w.sum()),
        np.sqrt(np.maximum(np.diag(cov), 0.0) / trials),
        math.sqrt(max(var_r, 0.0) / trials),
        trials,
        cov,
    )


def expected_range(
    src: SourceModel,
    n: int,
    mode: str = "closed_form",
    trials: int = 10**6,
    rng: Stream | int | None = None,
    level: float = DEFAULT_LEVEL,
    threads: int | None = None,
):
    """E[X_{n:n} - X_{1:n}].

    ``closed_form`` (uniform, exponential) and ``quadrature`` return a float;
    ``monte_carlo`` returns an :class:`Estimate`.
    """
    if n < 2:
        raise DimensionError("the range needs n >= 2")
    if mode == "closed_form":
        if isinstance(src, Uniform):
            return (src.b - src.a) * (n - 1) / (n + 1)
        if isinstance(src, Exponential):
            return math.fsum(1.0 / k for k in range(1, n)) / src.rate
        raise CapabilityError(f"no closed-form range for source {src.label()}")
    if mode == "quadrature":
        # E[R_n] = n * int_0^1 F^{-1}(u) (u^{n-1} - (1-u)^{n-1}) du
        def integrand(u):
            return float(src.ppf(u)) * (u ** (n - 1) - (1.0 - u) ** (n - 1))

        val, err, info = _quad(integrand, 0.0, 1.0)
        return n * val
    if mode == "monte_carlo":
        stream = as_stream(rng)

        def work(k, size):
            x = src.sample(stream.generator(k), (size, n))
            r = x.max(axis=1) - x.min(axis=1)
            return r.sum(), r @ r

        parts = map_blocks(work, trials, BLOCK, threads)
        return Estimate.from_sums(
            sum(p[0] for p in parts), sum(p[1] for p in parts), trials, stream.seed, level
        )
    raise ValueError(f"unknown mode {mode!r}")


def _quad(fn, a, b, epsrel=1e-10, epsabs=1e-13, limit=10_000):
    out = integrate.quad(fn, a, b, epsrel=epsrel, epsabs=epsabs, limit=limit, full_output=1)
    val, err, info = out[0], out[1], out[2]
    if len(out) > 3 and err > max(epsabs, epsrel * abs(val)) * 100:
        raise NumericError(f"quadrature did not converge: {out[3]} (value={val}, error={err})")
    return val, err, info
