"""Dense complex-matrix substrate.

Tensor factors follow numpy's ``kron`` convention: the leftmost factor is the
most significant index, so a basis vector ``|i>|j>`` of a ``(da, db)`` space
sits at position ``i * db + j``.
"""
from dataclasses import dataclass
from functools import reduce
from math import prod

import numpy as np

from . import kernels
from .errors import BadFactorIndexError, DimensionMismatchError, NoConvergenceError, NonHermitianError

HERMITIAN_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)


@dataclass(frozen=True)
class FactorSpace:
    """Ordered tensor-product structure of a finite-dimensional space."""

    factor_dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.factor_dims)
        if not dims or any(d < 1 for d in dims):
            raise DimensionMismatchError(f"factor dimensions must be positive, got {self.factor_dims}")
        object.__setattr__(self, "factor_dims", dims)

    @property
    def total_dim(self):
        return prod(self.factor_dims)

    def __len__(self):
        return len(self.factor_dims)


def is_hermitian(m, tol=HERMITIAN_TOL):
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.max(np.abs(m - m.conj().T), initial=0.0) <= tol


def hermitize(m):
    """Average ``m`` with its adjoint (removes accumulated round-off)."""
    m = np.asarray(m)
    return 0.5 * (m + m.conj().T)


def eigh(m, tol=HERMITIAN_TOL):
    """Eigen-decomposition of a Hermitian matrix.

    Returns ascending real eigenvalues and a unitary whose columns are the
    eigenvectors. Raises :class:`NonHermitianError` when ``m`` deviates from
    its adjoint by more than ``tol`` in any entry.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonHermitianError(f"expected a square matrix, got shape {m.shape}")
    if not is_hermitian(m, tol):
        dev = np.max(np.abs(m - m.conj().T))
        raise NonHermitianError(f"matrix deviates from its adjoint by {dev:.3e}")
    try:
        return kernels.eigh_hermitian(hermitize(m))
    except kernels.KernelNoConvergence as exc:
        raise NoConvergenceError(str(exc)) from exc


def eigvalsh(m, tol=HERMITIAN_TOL):
    return eigh(m, tol)[0]


def kron(*mats):
    """Kronecker product of one or more matrices (or vectors)."""
    if not mats:
        raise ValueError("kron needs at least one operand")
    return reduce(np.kron, (np.asarray(x) for x in mats))


def _check_factors(m, dims):
    dims = tuple(dims.factor_dims if isinstance(dims, FactorSpace) else dims)
    total = prod(dims)
    m = np.asarray(m)
    if m.ndim != 2 or m.shape != (total, total):
        raise DimensionMismatchError(f"matrix of shape {m.shape} does not match factor dims {dims}")
    return m, dims


def partial_trace(m, dims, keep):
    """Trace out every factor not listed in ``keep``.

    ``keep`` is an iterable of factor indices; the kept factors stay in their
    original order. Keeping nothing returns the 1x1 matrix ``[[tr m]]``.
    """
    m, dims = _check_factors(m, dims)
    keep = sorted(set(int(k) for k in keep))
    n = len(dims)
    for k in keep:
        if not 0 <= k < n:
            raise BadFactorIndexError(f"factor index {k} out of range for {n} factors")
    tensor = m.reshape(dims + dims)
    row = list(range(n))
    col = [k + n if k in keep else k for k in range(n)]
    out = [k for k in keep] + [k + n for k in keep]
    reduced = np.einsum(tensor, row + col, out)
    d = prod(dims[k] for k in keep)
    return reduced.reshape(d, d)


def embed(op, dims, factors):
    """Operator ``op`` acting on ``factors`` (contiguous, ordered) tensored with identities."""
    dims = tuple(dims)
    factors = list(factors)
    if factors != list(range(factors[0], factors[-1] + 1)):
        raise BadFactorIndexError("embed needs contiguous factor indices")
    left = prod(dims[: factors[0]])
    right = prod(dims[factors[-1] + 1:])
    return kron(np.eye(left), op, np.eye(right))


def op_norm(m):
    """Operator norm of a Hermitian matrix (largest absolute eigenvalue)."""
    w = eigvalsh(m)
    if w.size == 0:
        return 0.0
    return float(max(abs(w[0]), abs(w[-1])))


def anticommutator(a, b):
    return a @ b + b @ a


def commutator(a, b):
    return a @ b - b @ a


def psd_sqrt(m):
    """Square root of a positive semidefinite matrix (negative round-off clipped)."""
    w, v = eigh(m)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def orthonormal_complement(basis, dim):
    """Columns completing the orthonormal columns of ``basis`` to a basis of C^dim."""
    basis = np.asarray(basis, dtype=complex).reshape(dim, -1)
    k = basis.shape[1]
    if k >= dim:
        return np.zeros((dim, 0), dtype=complex)
    proj = np.eye(dim) - basis @ basis.conj().T
    _, v = eigh(hermitize(proj), tol=1e-8)
    return v[:, k:]
