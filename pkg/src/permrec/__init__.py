"""Error probability of recovering a permutation from noisy linear measurements."""

from .asymptotics import (
    RateResult,
    SlopeResult,
    alpha_coefficient,
    alpha_quadrature,
    alpha_volume_bounds,
    gaussian_slope_bounds,
    high_noise_rate,
    high_noise_rate_bounds,
    low_noise_slope,
    slope_upper_bound,
    spacing_density_at_zero,
)
from .errors import (
    CapabilityError,
    ContractError,
    CovarianceError,
    DecoderError,
    DimensionError,
    NumericError,
    PermrecError,
)
from .estimate import Estimate
from .model import (
    DecoderSpec,
    NoiseModel,
    Permutation,
    decode_batch,
    decode_linear,
    difference_matrix,
    tridiag_cov,
)
from .orthant import OrthantQuery, orthant_q, orthant_q_exact_2d
from .rng import Stream
from .simulate import ExperimentConfig, SweepRow, pe_direct, pe_isotropic, pe_limit_high, pe_theorem1, sweep
from .sources import (
    Custom,
    Exponential,
    SourceModel,
    SpacingStats,
    StandardNormal,
    Uniform,
    expected_range,
    expected_spacings,
    parse_source,
    sample_iid,
    sample_sorted,
    subgaussian_range_bound,
)

__all__ = [name for name in dir() if not name.startswith("_")]
