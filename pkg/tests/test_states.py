import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from di_kit.errors import (
    InvalidMeasurementError,
    InvalidStateError,
    MarginalMismatchError,
    NotAPOVMError,
    RangeError,
)
from di_kit.linalg import PAULI_X, partial_trace
from di_kit.states import (
    PVM,
    DensityMatrix,
    DichotomicObservable,
    angle_pvm,
    bell_diagonal_state,
    bloch_pvm,
    fixed_embedding_dilation,
    naimark_dilate,
    phi_plus,
    purify,
    random_density_matrix,
    random_povm,
    random_pure_state,
    random_unitary,
    uhlmann_isometry,
    werner_state,
)


def test_werner_endpoints():
    phi = phi_plus()
    assert np.allclose(werner_state(1.0).mat, np.outer(phi, phi.conj()))
    assert np.allclose(werner_state(0.0).mat, np.eye(4) / 4)
    with pytest.raises(RangeError):
        werner_state(1.2)


def test_werner_spectrum():
    v = 0.99
    lam = np.linalg.eigvalsh(werner_state(v).mat)
    assert np.allclose(lam, sorted([(1 + 3 * v) / 4] + [(1 - v) / 4] * 3), atol=1e-12)


def test_density_matrix_invariants():
    with pytest.raises(InvalidStateError):
        DensityMatrix(np.eye(2))
    with pytest.raises(InvalidStateError):
        DensityMatrix(np.diag([1.5, -0.5]))
    with pytest.raises(InvalidStateError):
        DensityMatrix(np.eye(4) / 4, (2, 3))
    rho = DensityMatrix(np.eye(4) / 4, (2, 2))
    assert rho.space.total_dim == 4
    assert np.allclose(rho.marginal([1]).mat, np.eye(2) / 2)


def test_bloch_pvm_axes():
    z = bloch_pvm(DichotomicObservable((0, 0, 1)))
    assert np.allclose(z[0], np.diag([1, 0])) and np.allclose(z[1], np.diag([0, 1]))
    x = bloch_pvm(DichotomicObservable((1, 0, 0)))
    assert np.allclose(x[0], (np.eye(2) + PAULI_X) / 2)
    with pytest.raises(RangeError):
        DichotomicObservable((1, 1, 0))


@pytest.mark.parametrize("theta", [0.3, 1.0, 2.2])
def test_bloch_overlap(theta):
    zp = angle_pvm(0.0)[0]
    tp = angle_pvm(theta)[0]
    # |<a+|b+>|^2 = tr(P Q) for rank-one projectors
    assert np.trace(zp @ tp).real == pytest.approx((1 + np.cos(theta)) / 2, abs=1e-12)


def test_pvm_validation():
    with pytest.raises(InvalidMeasurementError):
        PVM((np.diag([1, 0]), np.diag([1, 0])))
    with pytest.raises(InvalidMeasurementError):
        PVM((np.diag([1, 0]),))
    with pytest.raises(InvalidMeasurementError):
        PVM((np.full((2, 2), 0.5), np.eye(2) - 0.4))


def test_purify_examples():
    psi, dims = purify(DensityMatrix.from_vector([1, 1j, 0, 0], (2, 2)))
    assert dims == (2, 2, 1)
    psi, dims = purify(DensityMatrix(np.eye(2) / 2))
    assert dims == (2, 2)
    assert np.allclose(partial_trace(np.outer(psi, psi.conj()), dims, [0]), np.eye(2) / 2)
    rho = werner_state(0.96)
    psi, dims = purify(rho)
    assert dims == (2, 2, 4)
    assert np.max(np.abs(partial_trace(np.outer(psi, psi.conj()), dims, [0, 1]) - rho.mat)) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**31 - 1))
def test_purify_left_inverse(rank, seed):
    rho = random_density_matrix((2, 3), np.random.default_rng(seed), rank=rank)
    psi, dims = purify(rho)
    assert dims[-1] == rank
    back = partial_trace(np.outer(psi, psi.conj()), dims, [0, 1])
    assert np.max(np.abs(back - rho.mat)) <= 1e-10


def test_uhlmann_identity_and_unitary(rng):
    chi = random_pure_state(6, rng)
    w = uhlmann_isometry(chi, chi, 2)
    assert np.allclose(w, np.eye(3), atol=1e-9)
    u = random_unitary(3, rng)
    phi = (chi.reshape(2, 3) @ u.T).ravel()
    w = uhlmann_isometry(chi, phi, 2)
    # W agrees with U on the support of chi's purifying side
    c = chi.reshape(2, 3)
    supp = c.T @ np.linalg.pinv(c.T)
    assert np.allclose(w @ supp, u @ supp, atol=1e-8)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(2, 4), st.integers(0, 3))
def test_uhlmann_reconstruction(seed, r1, extra):
    rng = np.random.default_rng(seed)
    chi = random_pure_state(2 * r1, rng)
    r2 = r1 + extra
    # second purification: embed, then a random unitary on the larger space
    pad = np.zeros((2, r2), dtype=complex)
    pad[:, :r1] = chi.reshape(2, r1)
    phi = (pad @ random_unitary(r2, rng).T).ravel()
    w = uhlmann_isometry(chi, phi, 2)
    assert np.max(np.abs(np.kron(np.eye(2), w) @ chi - phi)) <= 1e-8
    assert np.allclose(w.conj().T @ w, np.eye(r1), atol=1e-9)


def test_uhlmann_mismatch(rng):
    chi = np.kron([1, 0], [1, 0]).astype(complex)
    phi = np.kron([0, 1], [1, 0]).astype(complex)
    with pytest.raises(MarginalMismatchError):
        uhlmann_isometry(chi, phi, 2)


def _compression(v, pvm):
    return [v.conj().T @ p @ v for p in pvm.projectors]


def test_naimark_projective_input():
    effects = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    v, pvm = naimark_dilate(effects)
    for got, want in zip(_compression(v, pvm), effects):
        assert np.max(np.abs(got - want)) <= 1e-12


def test_naimark_binary_and_trine():
    e0 = 0.7 * np.diag([1.0, 0.0]) + 0.3 * np.eye(2) / 2
    v, pvm = naimark_dilate([e0, np.eye(2) - e0])
    assert np.max(np.abs(_compression(v, pvm)[0] - e0)) <= 1e-10
    trine = []
    for k in range(3):
        a = 2 * np.pi * k / 3
        ket = np.array([np.cos(a / 2), np.sin(a / 2)])
        trine.append(2 / 3 * np.outer(ket, ket))
    v, pvm = naimark_dilate(trine)
    assert v.shape == (6, 2)
    for got, want in zip(_compression(v, pvm), trine):
        assert np.max(np.abs(got - want)) <= 1e-10


def test_naimark_rejects_non_povm():
    with pytest.raises(NotAPOVMError):
        naimark_dilate([np.eye(2), np.eye(2)])
    with pytest.raises(NotAPOVMError):
        naimark_dilate([np.diag([1.5, 1.0]), np.diag([-0.5, 0.0])])


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(2, 4), st.integers(2, 3))
def test_naimark_random(seed, n, d):
    effects = random_povm(d, n, np.random.default_rng(seed))
    v, pvm = naimark_dilate(effects)
    assert np.allclose(v.conj().T @ v, np.eye(d), atol=1e-10)
    for got, want in zip(_compression(v, pvm), effects):
        assert np.max(np.abs(got - want)) <= 1e-9


def test_fixed_embedding_dilation(rng):
    povms = [random_povm(3, 2, rng), random_povm(3, 3, rng)]
    v, pvms, k_dim = fixed_embedding_dilation(povms)
    assert k_dim == 5
    assert np.allclose(v.conj().T @ v, np.eye(3))
    for effects, pvm in zip(povms, pvms):
        PVM(pvm.projectors)  # full validation
        for got, want in zip(_compression(v, pvm), effects):
            assert np.max(np.abs(got - want)) <= 1e-9


def test_bell_diagonal_state():
    assert np.allclose(bell_diagonal_state([1, 0, 0, 0]).mat, werner_state(1.0).mat)
    with pytest.raises(RangeError):
        bell_diagonal_state([0.5, 0.6, 0, 0])
