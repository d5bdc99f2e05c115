"""Low-noise slope and high-noise rate of the error probability (isotropic noise).

As sigma -> 0, P_e(sigma) / sigma tends to sum_i f_{W_i}(0+) / sqrt(pi), with
W_i the spacings of the i.i.d. source. As sigma -> inf,
sigma * (P_e(inf) - P_e(sigma)) tends to f_V(0) * sum_i alpha_i E[W_i], where
f_V(0) = 1 / (2 sqrt(pi)) is the density at zero of one coordinate of
V ~ N(0, tridiag) and

    alpha_i = Pr(V_j >= 0 for all j != i | V_i = 0)
            = Pr(Z_1 <= ... <= Z_{i-1} <= Z_i / sqrt(2) <= Z_{i+2} <= ... <= Z_n).

Equivalently the rate is (1 / sqrt(2 pi)) sum_i beta_i E[W_i] with the
cone-ellipsoid volume ratio beta_i = alpha_i / sqrt(2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import gammaln, ndtr

from .errors import CapabilityError, ContractError, DimensionError, NumericError
from .estimate import DEFAULT_LEVEL, Estimate, Moments
from .rng import Stream, as_stream, map_blocks
from .sources import Exponential, SourceModel, Uniform, expected_range, expected_spacings

BLOCK = 1 << 16
SQRT_PI = math.sqrt(math.pi)
#: density at zero of N(0, 2)
F_V0 = 1.0 / (2.0 * SQRT_PI)

QUAD_EPSREL = 1e-8
QUAD_EPSABS = 1e-12
QUAD_LIMIT = 10_000


@dataclass(frozen=True, eq=False)
class SlopeResult:
    n: int
    per_i: np.ndarray
    slope: float
    upper_bound: float | None
    method: str


@dataclass(frozen=True, eq=False)
class RateResult:
    n: int
    alpha: np.ndarray
    alpha_se: np.ndarray
    e_w: np.ndarray
    e_w_se: np.ndarray
    rate: float
    rate_se: float
    lower_bound: float
    upper_bound: float

    @property
    def volume_ratio(self) -> np.ndarray:
        """Cone-ellipsoid volume ratios, alpha / sqrt(2)."""
        return self.alpha / math.sqrt(2.0)

    def within_bounds(self, n_se: float = 4.0) -> bool:
        # n = 2 sits exactly on the lower bound; allow for rounding
        slack = n_se * self.rate_se + 1e-12 * self.upper_bound
        return self.lower_bound - slack <= self.rate <= self.upper_bound + slack


def _check_index(n: int, i: int):
    if n < 2 or not 1 <= i <= n - 1:
        raise DimensionError(f"need n >= 2 and 1 <= i <= n-1, got n={n}, i={i}")


def _log_spacing_coef(n: int, i: int) -> float:
    # log of n! / ((i-1)! (n-i-1)!)
    return float(gammaln(n + 1) - gammaln(i) - gammaln(n - i))


def spacing_density_at_zero(src: SourceModel, n: int, i: int, method: str = "auto") -> float:
    """Density of the i-th spacing W_i at 0+.

    ``method`` is ``"closed_form"`` (uniform, exponential), ``"quadrature"``
    (integral over the quantile domain) or ``"auto"``.
    """
    _check_index(n, i)
    if not src.bounded_difference_density:
        raise ContractError("source does not declare a bounded density for X - X'")
    if method in ("auto", "closed_form"):
        if isinstance(src, Uniform):
            return n / (src.b - src.a)
        if isinstance(src, Exponential):
            return src.rate * (n - i)
        if method == "closed_form":
            raise CapabilityError(f"no closed-form spacing density for {src.label()}")
    elif method != "quadrature":
        raise ValueError(f"unknown method {method!r}")

    log_coef = _log_spacing_coef(n, i)

    def integrand(u):
        # u^(i-1) (1-u)^(n-i-1) f(F^{-1}(u)), with the coefficient folded in
        if u <= 0.0 or u >= 1.0:
            return 0.0
        log_w = log_coef + (i - 1) * math.log(u) + (n - i - 1) * math.log1p(-u)
        return math.exp(log_w) * float(src.density_at_quantile(u))

    out = integrate.quad(
        integrand, 0.0, 1.0, epsrel=QUAD_EPSREL, epsabs=QUAD_EPSABS, limit=QUAD_LIMIT, full_output=1
    )
    val, err = out[0], out[1]
    if len(out) > 3 and err > max(QUAD_EPSABS, QUAD_EPSREL * abs(val)):
        raise NumericError(
            f"spacing density quadrature failed for n={n}, i={i}: {out[3]} "
            f"(value={val:.6g}, error={err:.2g}, intervals={out[2]['last']})"
        )
    return val


def slope_upper_bound(c: float, n: int) -> float:
    """c n (n-1) / sqrt(pi) for a source whose density is bounded by c."""
    if not c > 0 or n < 2:
        raise ValueError("need c > 0 and n >= 2")
    return c * n * (n - 1) / SQRT_PI


def gaussian_slope_bounds(n: int) -> tuple[float, float]:
    if n < 2:
        raise ValueError("need n >= 2")
    nn = n * (n - 1)
    return math.sqrt(2.0) * nn / (6.0 * math.pi), nn / (math.sqrt(2.0) * math.pi)


def low_noise_slope(src: SourceModel, n: int, method: str = "auto") -> SlopeResult:
    """lim P_e(sigma) / sigma as sigma -> 0, with the per-spacing densities."""
    if n < 2:
        raise DimensionError("the slope needs n >= 2")
    per_i = np.array([spacing_density_at_zero(src, n, i, method) for i in range(1, n)])
    used = method
    if method == "auto":
        used = "closed_form" if isinstance(src, (Uniform, Exponential)) else "quadrature"
    c = src.sup_density
    bound = slope_upper_bound(c, n) if c is not None else None
    return SlopeResult(n, per_i, float(per_i.sum() / SQRT_PI), bound, used)


def alpha_coefficient(
    n: int,
    i: int,
    samples: int = 10**6,
    rng: Stream | int | None = None,
    level: float = DEFAULT_LEVEL,
    threads: int | None = None,
) -> Estimate:
    """Monte Carlo estimate of alpha_i (conditional-probability form)."""
    _check_index(n, i)
    if n == 2:
        return Estimate.exact(1.0)
    stream = as_stream(rng)
    col = i - 1
    scale = 1.0 / math.sqrt(2.0)

    def work(k, size):
        z = stream.generator(k).standard_normal((size, n - 1))
        z[:, col] *= scale
        return Moments.of(np.all(np.diff(z, axis=1) >= 0, axis=1))

    mom = Moments.merge_all(map_blocks(work, samples, BLOCK, threads))
    return Estimate.from_moments(mom.mean, mom.variance, mom.count, stream.seed, level, (0.0, 1.0))


def alpha_quadrature(n: int, i: int) -> float:
    """alpha_i by 1-D quadrature over the merged coordinate t ~ N(0, 1/2).

    Pr(i-1 ordered normals below t) = Phi(t)^(i-1) / (i-1)!, and likewise
    above t with 1 - Phi(t).
    """
    _check_index(n, i)
    lo, hi = i - 1, n - i - 1
    log_norm = -math.lgamma(lo + 1) - math.lgamma(hi + 1) - 0.5 * math.log(math.pi)

    def integrand(t):
        p = float(ndtr(t))
        return math.exp(log_norm - t * t) * p**lo * (1.0 - p) ** hi

    val, _ = integrate.quad(integrand, -np.inf, np.inf, epsabs=1e-14, epsrel=1e-12, limit=500)
    return val


def alpha_volume_bounds(n: int) -> tuple[float, float]:
    """[1 / (2^((n-1)/2) (n-1)!), 1 / (n-1)!], the ball-sandwich bracket on the volume ratio."""
    if n < 2:
        raise ValueError("need n >= 2")
    f = math.factorial(n - 1)
    return 1.0 / (2.0 ** ((n - 1) / 2.0) * f), 1.0 / f


def _range_for_bounds(src: SourceModel, n: int) -> float:
    try:
        return expected_range(src, n, "closed_form")
    except CapabilityError:
        return expected_range(src, n, "quadrature")


def high_noise_rate_bounds(src: SourceModel, n: int) -> tuple[float, float]:
    """Bracket on lim sigma (P_e(inf) - P_e(sigma)) from the range E[R_n]."""
    if n < 2:
        raise DimensionError("need n >= 2")
    er = _range_for_bounds(src, n)
    f = math.factorial(n - 1)
    return er / (SQRT_PI * f * 2.0 ** (n / 2.0)), er / (math.sqrt(2.0 * math.pi) * f)


def high_noise_rate(
    src: SourceModel,
    n: int,
    alpha_samples: int = 10**6,
    spacing_trials: int = 10**6,
    rng: Stream | int | None = None,
    exact_spacings: bool = True,
    threads: int | None = None,
) -> RateResult:
    """lim sigma (P_e(inf) - P_e(sigma)) = f_V(0) * sum_i alpha_i E[W_i].

    Each alpha_i uses its own substream; spacings use another. The standard
    error treats the two estimators as independent.
    """
    if n < 2:
        raise DimensionError("need n >= 2")
    stream = as_stream(rng)
    alphas = [
        alpha_coefficient(n, i, alpha_samples, stream.child(1, i), threads=threads)
        for i in range(1, n)
    ]
    alpha = np.array([a.value for a in alphas])
    alpha_se = np.array([a.std_error for a in alphas])
    sp = expected_spacings(src, n, spacing_trials, stream.child(2), exact=exact_spacings, threads=threads)
    rate = F_V0 * float(alpha @ sp.e_w)
    var = float(np.sum((sp.e_w * alpha_se) ** 2))
    if sp.trials:
        var += float(alpha @ sp.w_cov @ alpha) / sp.trials
    lo, hi = high_noise_rate_bounds(src, n)
    return RateResult(n, alpha, alpha_se, sp.e_w, sp.e_w_se, rate, F_V0 * math.sqrt(var), lo, hi)
