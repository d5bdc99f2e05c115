"""Permutations, hypothesis cones, difference matrices and channel/decoder types.

Permutations use the position-of-rank convention: ``order[k]`` is the
(1-based) index of the ``k``-th smallest coordinate, so ``x`` lies in the cone
of ``pi`` iff ``x[order[0]] <= x[order[1]] <= ...``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import CovarianceError, DecoderError, DimensionError

MAX_CONDITION = 1e12
CHOLESKY_FLOOR = 1e-12


@dataclass(frozen=True)
class Permutation:
    order: tuple[int, ...]

    def __post_init__(self):
        order = tuple(int(i) for i in self.order)
        if sorted(order) != list(range(1, len(order) + 1)):
            raise ValueError(f"not a permutation of 1..{len(order)}: {order}")
        object.__setattr__(self, "order", order)

    @property
    def n(self) -> int:
        return len(self.order)

    @property
    def indices(self) -> np.ndarray:
        """0-based position-of-rank indices."""
        return np.asarray(self.order, dtype=np.intp) - 1

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def sorting(cls, x: Sequence[float]) -> "Permutation":
        """The permutation sorting ``x``; ties go to the smaller index first."""
        idx = np.argsort(np.asarray(x, dtype=float), kind="stable")
        return cls(tuple(idx + 1))

    @classmethod
    def from_ranks(cls, ranks: Sequence[int]) -> "Permutation":
        """Convert rank-of-position (``ranks[j]`` = 1-based rank of coordinate j)."""
        ranks = np.asarray(ranks, dtype=np.intp)
        order = np.empty_like(ranks)
        order[ranks - 1] = np.arange(1, len(ranks) + 1)
        return cls(tuple(order))

    def ranks(self) -> tuple[int, ...]:
        ranks = np.empty(self.n, dtype=np.intp)
        ranks[self.indices] = np.arange(1, self.n + 1)
        return tuple(int(r) for r in ranks)

    def sorts(self, x: Sequence[float]) -> bool:
        """Membership of ``x`` in the hypothesis cone of this permutation."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise DimensionError(f"expected a {self.n}-vector, got shape {x.shape}")
        return bool(np.all(np.diff(x[self.indices]) >= 0))


def difference_matrix(pi: Permutation) -> np.ndarray:
    """(n-1) x n matrix with +1 at column pi_{i+1} and -1 at column pi_i in row i."""
    idx = pi.indices
    rows = np.arange(pi.n - 1)
    t = np.zeros((pi.n - 1, pi.n), dtype=np.int64)
    t[rows, idx[1:]] = 1
    t[rows, idx[:-1]] = -1
    return t


def tridiag_cov(n: int) -> np.ndarray:
    """The (n-1) x (n-1) matrix with 2 on the diagonal and -1 beside it."""
    if n < 2:
        raise DimensionError(f"tridiag_cov needs n >= 2, got {n}")
    m = n - 1
    return 2.0 * np.eye(m) - np.eye(m, k=1) - np.eye(m, k=-1)


def cholesky_checked(k: np.ndarray, what: str = "covariance") -> np.ndarray:
    k = np.asarray(k, dtype=float)
    if k.ndim != 2 or k.shape[0] != k.shape[1]:
        raise DimensionError(f"{what} must be square, got shape {k.shape}")
    if not np.allclose(k, k.T, rtol=1e-10, atol=1e-14):
        raise CovarianceError(f"{what} is not symmetric")
    try:
        chol = np.linalg.cholesky(k)
    except np.linalg.LinAlgError as exc:
        raise CovarianceError(f"{what} is not positive definite") from exc
    if np.any(np.diag(chol) <= CHOLESKY_FLOOR):
        raise CovarianceError(f"{what} is numerically singular")
    return chol


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """Additive Gaussian noise: isotropic ``sigma**2 I`` or a full covariance."""

    n: int
    sigma: float | None = None
    cov: np.ndarray | None = None

    def __post_init__(self):
        if (self.sigma is None) == (self.cov is None):
            raise ValueError("give exactly one of sigma and cov")
        if self.sigma is not None:
            if not np.isfinite(self.sigma) or self.sigma < 0:
                raise ValueError(f"sigma must be finite and >= 0, got {self.sigma}")
            object.__setattr__(self, "sigma", float(self.sigma))
        else:
            cov = _frozen(self.cov)
            if cov.shape != (self.n, self.n):
                raise DimensionError(f"noise covariance must be {self.n}x{self.n}, got {cov.shape}")
            cholesky_checked(cov, "noise covariance")
            object.__setattr__(self, "cov", cov)

    @classmethod
    def isotropic(cls, sigma: float, n: int) -> "NoiseModel":
        return cls(n, sigma=sigma)

    @classmethod
    def general(cls, cov) -> "NoiseModel":
        cov = np.asarray(cov, dtype=float)
        return cls(cov.shape[0], cov=cov)

    @property
    def is_isotropic(self) -> bool:
        return self.sigma is not None

    @property
    def covariance(self) -> np.ndarray:
        if self.sigma is not None:
            return self.sigma**2 * np.eye(self.n)
        return self.cov

    @cached_property
    def cholesky(self) -> np.ndarray:
        if self.sigma is not None:
            return self.sigma * np.eye(self.n)
        return np.linalg.cholesky(self.cov)


@dataclass(frozen=True, eq=False)
class DecoderSpec:
    """Affine decoder: sorts ``A^{-1} (y - b)``."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a, b = _frozen(self.A), _frozen(self.b)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError(f"A must be square, got shape {a.shape}")
        if b.shape != (a.shape[0],):
            raise DimensionError(f"b must have shape ({a.shape[0]},), got {b.shape}")
        cond = np.linalg.cond(a)
        if not np.isfinite(cond) or cond > MAX_CONDITION:
            raise DecoderError(f"A is singular or ill-conditioned (cond={cond:.3g})")
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def identity(cls, n: int) -> "DecoderSpec":
        return cls(np.eye(n), np.zeros(n))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @cached_property
    def is_identity(self) -> bool:
        return bool(np.array_equal(self.A, np.eye(self.n)) and not np.any(self.b))

    @cached_property
    def A_inv(self) -> np.ndarray:
        return np.linalg.inv(self.A)

    def transform(self, y: np.ndarray) -> np.ndarray:
        """Row-wise ``A^{-1} (y - b)``; exact pass-through for the identity decoder."""
        y = np.asarray(y, dtype=float)
        if self.is_identity:
            return y
        return (y - self.b) @ self.A_inv.T


def decode_linear(y: Sequence[float], decoder: DecoderSpec | None = None) -> Permutation:
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise DimensionError("decode_linear takes a single observation vector")
    if not np.all(np.isfinite(y)):
        raise ValueError("observation must be finite")
    decoder = decoder or DecoderSpec.identity(len(y))
    if decoder.n != len(y):
        raise DimensionError(f"decoder is {decoder.n}-dimensional, observation has {len(y)}")
    return Permutation.sorting(decoder.transform(y))


def decode_batch(y: np.ndarray, decoder: DecoderSpec) -> np.ndarray:
    """0-based orders for each row of ``y``, same tie rule as :func:`decode_linear`."""
    return np.argsort(decoder.transform(y), axis=-1, kind="stable")


def in_cone(x: np.ndarray, order: np.ndarray) -> np.ndarray:
    """Row-wise membership of ``x`` in the cone given by 0-based ``order``."""
    xs = np.take_along_axis(x, order, axis=-1)
    return np.all(np.diff(xs, axis=-1) >= 0, axis=-1)
