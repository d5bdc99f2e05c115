"""Exception hierarchy shared by every module."""


class PermrecError(Exception):
    """Base class for toolkit errors."""


class DimensionError(PermrecError, ValueError):
    """Array shapes or the problem dimension are inconsistent."""


class CovarianceError(PermrecError, ValueError):
    """A covariance matrix is not symmetric positive definite."""


class DecoderError(PermrecError, ValueError):
    """The decoder matrix is singular or too badly conditioned."""


class CapabilityError(PermrecError, ValueError):
    """The requested computation is not available for this source."""


class ContractError(PermrecError, ValueError):
    """A caller violated an estimator's preconditions."""


class NumericError(PermrecError, ArithmeticError):
    """A numerical routine failed to converge."""
