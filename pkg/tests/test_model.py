import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permrec import (
    DecoderError,
    DecoderSpec,
    DimensionError,
    NoiseModel,
    Permutation,
    decode_batch,
    decode_linear,
    difference_matrix,
    tridiag_cov,
)
from permrec.errors import CovarianceError
from permrec.model import in_cone


@st.composite
def permutations(draw, lo=2, hi=8):
    n = draw(st.integers(lo, hi))
    return Permutation(tuple(x + 1 for x in draw(st.permutations(range(n)))))


@given(permutations())
def test_difference_gram_is_tridiagonal(pi):
    t = difference_matrix(pi)
    assert t.dtype.kind == "i"
    assert np.array_equal(t @ t.T, tridiag_cov(pi.n).astype(np.int64))
    assert np.all(t.sum(axis=1) == 0)


def test_difference_gram_exhaustive_small():
    for n in range(2, 6):
        k = tridiag_cov(n).astype(np.int64)
        for order in itertools.permutations(range(1, n + 1)):
            t = difference_matrix(Permutation(order))
            assert np.array_equal(t @ t.T, k)


def test_difference_matrix_example():
    t = difference_matrix(Permutation((2, 3, 1)))
    assert t.tolist() == [[0, -1, 1], [1, 0, -1]]


@pytest.mark.parametrize("n", range(2, 11))
def test_tridiag_spectrum(n):
    ev = np.sort(np.linalg.eigvalsh(tridiag_cov(n)))
    ref = np.sort(2 - 2 * np.cos(np.arange(1, n) * np.pi / n))
    assert np.allclose(ev, ref, atol=1e-10, rtol=0)
    assert np.linalg.det(tridiag_cov(n)) == pytest.approx(n)


def test_tridiag_rejects_small_n():
    with pytest.raises(DimensionError):
        tridiag_cov(1)


def test_permutation_conventions():
    x = [0.3, -1.0, 2.0, 0.5]
    pi = Permutation.sorting(x)
    assert pi.order == (2, 1, 4, 3)
    assert pi.sorts(x)
    assert not Permutation.identity(4).sorts(x)
    assert Permutation.from_ranks(pi.ranks()) == pi
    assert pi.ranks() == (2, 1, 4, 3)
    with pytest.raises(ValueError):
        Permutation((1, 1, 2))


def test_sorting_is_stable_on_ties():
    assert Permutation.sorting([1.0, 0.0, 1.0]).order == (2, 1, 3)


def _random_decoder(rng, n):
    A = rng.normal(size=(n, n)) + n * np.eye(n)
    return A, rng.normal(size=n)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 7), st.integers(0, 2**32 - 1), st.floats(0.01, 100), st.floats(-5, 5))
def test_decoder_invariances(n, seed, c, shift):
    rng = np.random.default_rng(seed)
    A, b = _random_decoder(rng, n)
    y = rng.normal(size=(50, n))
    base = decode_batch(y, DecoderSpec(A, b))
    assert np.array_equal(base, decode_batch(y, DecoderSpec(c * A, b)))
    # adding t(1,...,1) to b shifts every coordinate of A^{-1}(y - b) by t A^{-1}1, which
    # is a common shift only when A maps 1 to a multiple of 1; test with A = I
    ident = decode_batch(y, DecoderSpec(np.eye(n), b))
    assert np.array_equal(ident, decode_batch(y, DecoderSpec(np.eye(n), b + shift)))


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 7), st.integers(0, 2**32 - 1))
def test_decoded_cone_is_unique(n, seed):
    rng = np.random.default_rng(seed)
    A, b = _random_decoder(rng, n)
    dec = DecoderSpec(A, b)
    y = rng.normal(size=n)
    u = np.linalg.solve(A, y - b)
    pi = decode_linear(y, dec)
    members = [p for p in itertools.permutations(range(1, n + 1)) if Permutation(p).sorts(u)]
    assert members == [pi.order]


def test_in_cone_rowwise():
    x = np.array([[0.0, 1.0, 2.0], [2.0, 1.0, 0.0]])
    order = np.array([[0, 1, 2], [0, 1, 2]])
    assert in_cone(x, order).tolist() == [True, False]


def test_decoder_validation():
    with pytest.raises(DecoderError):
        DecoderSpec(np.array([[1.0, 1.0], [1.0, 1.0 + 1e-14]]), np.zeros(2))
    assert DecoderSpec.identity(3).is_identity


def test_noise_validation():
    with pytest.raises(CovarianceError):
        NoiseModel.general(np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(CovarianceError):
        NoiseModel.general(np.array([[1.0, 0.5], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        NoiseModel.isotropic(-1.0, 3)
    nm = NoiseModel.isotropic(0.5, 3)
    assert np.allclose(nm.covariance, 0.25 * np.eye(3))
    assert math.isclose(NoiseModel.general(np.eye(2)).cholesky[1, 1], 1.0)
