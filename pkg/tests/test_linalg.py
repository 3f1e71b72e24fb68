import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_hermitian
from di_kit.errors import BadFactorIndexError, DimensionMismatchError, NonHermitianError
from di_kit.linalg import (
    PAULI_X,
    PAULI_Z,
    FactorSpace,
    anticommutator,
    commutator,
    eigh,
    embed,
    kron,
    op_norm,
    orthonormal_complement,
    partial_trace,
    psd_sqrt,
)
from di_kit.states import random_unitary


def dichotomic(d, rng):
    """Random Hermitian involution on C^d."""
    u = random_unitary(d, rng)
    k = int(rng.integers(0, d + 1))
    return u @ np.diag([1.0] * k + [-1.0] * (d - k)) @ u.conj().T


def test_kron_leftmost_factor_most_significant():
    ket0, ket1 = np.array([1, 0]), np.array([0, 1])
    v = kron(ket1, ket0, ket1)
    assert np.flatnonzero(v).tolist() == [0b101]


def test_partial_trace_of_product(rng):
    a = random_hermitian(2, rng)
    b = random_hermitian(3, rng)
    c = random_hermitian(2, rng)
    m = kron(a, b, c)
    assert np.allclose(partial_trace(m, (2, 3, 2), [1]), np.trace(a) * np.trace(c) * b)
    assert np.allclose(partial_trace(m, (2, 3, 2), [0, 2]), np.trace(b) * kron(a, c))
    assert np.allclose(partial_trace(m, (2, 3, 2), []), [[np.trace(m)]])


def test_partial_trace_errors():
    with pytest.raises(DimensionMismatchError):
        partial_trace(np.eye(4), (2, 3), [0])
    with pytest.raises(BadFactorIndexError):
        partial_trace(np.eye(4), (2, 2), [2])


def test_embed_places_operator():
    got = embed(PAULI_X, (2, 2, 2), [1])
    assert np.allclose(got, kron(np.eye(2), PAULI_X, np.eye(2)))
    with pytest.raises(BadFactorIndexError):
        embed(np.eye(4), (2, 2, 2), [0, 2])


def test_factor_space():
    assert FactorSpace((2, 3)).total_dim == 6
    with pytest.raises(DimensionMismatchError):
        FactorSpace((2, 0))


def test_eigh_rejects_non_hermitian():
    with pytest.raises(NonHermitianError):
        eigh(np.array([[0, 1], [0, 0]]))


def test_op_norm_and_sqrt(rng):
    assert op_norm(PAULI_Z) == pytest.approx(1.0)
    g = rng.normal(size=(4, 4))
    p = g @ g.T
    r = psd_sqrt(p)
    assert np.allclose(r @ r, p, atol=1e-10)


def test_orthonormal_complement(rng):
    q, _ = np.linalg.qr(rng.normal(size=(5, 2)))
    comp = orthonormal_complement(q, 5)
    full = np.hstack([q, comp])
    assert comp.shape == (5, 3)
    assert np.allclose(full.conj().T @ full, np.eye(5), atol=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**31 - 1))
def test_anticommutator_commutator_identity(d, seed):
    rng = np.random.default_rng(seed)
    a, b = dichotomic(d, rng), dichotomic(d, rng)
    ac, cm = anticommutator(a, b), commutator(a, b)
    assert np.max(np.abs(ac @ ac - cm @ cm - 4 * np.eye(d))) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_partial_trace_preserves_trace(seed):
    rng = np.random.default_rng(seed)
    m = random_hermitian(12, rng)
    for keep in ([0], [1], [2], [0, 2]):
        assert np.trace(partial_trace(m, (2, 3, 2), keep)) == pytest.approx(np.trace(m), abs=1e-10)
