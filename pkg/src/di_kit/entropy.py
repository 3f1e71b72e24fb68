"""Entropies in bits."""
from dataclasses import dataclass

import numpy as np

from .errors import BadFactorIndexError, InvalidStateError, RangeError
from .linalg import eigvalsh, hermitize, partial_trace
from .states import DensityMatrix

CLIP = 1e-14


def binary_entropy(q):
    if not 0.0 <= q <= 1.0:
        raise RangeError(f"binary entropy needs q in [0, 1], got {q}")
    if q == 0.0 or q == 1.0:
        return 0.0
    return float(-q * np.log2(q) - (1 - q) * np.log2(1 - q))


def shannon(probs):
    p = np.asarray(probs, dtype=float)
    p = p[p > CLIP]
    return float(-np.sum(p * np.log2(p)))


def _spectrum_entropy(lam):
    lam = np.asarray(lam, dtype=float)
    lam = lam[lam >= CLIP]
    return float(-np.sum(lam * np.log2(lam)))


def von_neumann(rho):
    mat = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho)
    return _spectrum_entropy(eigvalsh(hermitize(mat), tol=1e-8))


def _as_state(rho, dims):
    if isinstance(rho, DensityMatrix):
        return rho.mat, rho.dims
    if dims is None:
        raise InvalidStateError("factor dimensions required for a bare matrix")
    return np.asarray(rho), tuple(dims)


def cond_entropy(rho, condition_on, dims=None):
    """``S(XY) - S(Y)`` where ``Y`` are the factors in ``condition_on``.

    ``X`` is every other factor. Factor indices refer to ``rho.dims``.
    """
    mat, dims = _as_state(rho, dims)
    cond = sorted({int(k) for k in np.atleast_1d(condition_on)})
    for k in cond:
        if not 0 <= k < len(dims):
            raise BadFactorIndexError(f"factor index {k} out of range for {len(dims)} factors")
    s_all = von_neumann(mat)
    s_cond = von_neumann(partial_trace(mat, dims, cond)) if cond else 0.0
    return s_all - s_cond


@dataclass(frozen=True)
class CQState:
    """Classical outcome distribution paired with conditional states of a quantum side."""

    outcome_probs: tuple
    conditional_env_states: tuple

    def __post_init__(self):
        p = np.asarray(self.outcome_probs, dtype=float)
        if np.any(p < -1e-10) or abs(p.sum() - 1.0) > 1e-10:
            raise InvalidStateError("outcome probabilities must be a distribution")
        if len(self.conditional_env_states) != len(p):
            raise InvalidStateError("one conditional state per outcome is required")
        object.__setattr__(self, "outcome_probs", tuple(float(x) for x in np.clip(p, 0, None)))
        object.__setattr__(self, "conditional_env_states", tuple(self.conditional_env_states))

    def cond_entropy(self):
        """``H(Z|E) = H(Z) + sum_z p_z S(rho_E|z) - S(rho_E)``."""
        avg = sum(p * s.mat for p, s in zip(self.outcome_probs, self.conditional_env_states))
        h = shannon(self.outcome_probs)
        h += sum(p * von_neumann(s) for p, s in zip(self.outcome_probs, self.conditional_env_states) if p > 0)
        return h - von_neumann(avg)


def measure_cq(psi, dims, pvm, measured=0, keep=(2,)):
    """Measure factor ``measured`` of the pure state ``psi`` and keep factors ``keep``."""
    dims = tuple(dims)
    psi = np.asarray(psi, dtype=complex).ravel()
    rho = np.outer(psi, psi.conj())
    keep = sorted(keep)
    probs, states = [], []
    left = int(np.prod(dims[:measured]))
    right = int(np.prod(dims[measured + 1:]))
    for proj in pvm.projectors:
        op = np.kron(np.kron(np.eye(left), proj), np.eye(right))
        branch = op @ rho @ op
        sub = partial_trace(branch, dims, keep)
        p = float(np.trace(sub).real)
        probs.append(p)
        d = sub.shape[0]
        states.append(
            DensityMatrix(hermitize(sub / p), tuple(dims[k] for k in keep), validate=False)
            if p > CLIP
            else DensityMatrix(np.eye(d) / d, tuple(dims[k] for k in keep), validate=False)
        )
    probs = np.clip(np.array(probs), 0, None)
    return CQState(tuple(probs / probs.sum()), tuple(states))


def measured_cond_entropy(psi, dims, pvm, condition=2, measured=0):
    """``H(Z|C)`` for the outcome ``Z`` of ``pvm`` on factor ``measured`` of ``psi``.

    ``condition`` is a factor index (or list of indices) of the conditioning
    system; the remaining factors are discarded.
    """
    cond = [int(k) for k in np.atleast_1d(condition)]
    for k in cond + [measured]:
        if not 0 <= k < len(dims):
            raise BadFactorIndexError(f"factor index {k} out of range for {len(dims)} factors")
    return measure_cq(psi, dims, pvm, measured, cond).cond_entropy()


def devetak_winter(h_a_given_e, h_a_given_b):
    return float(h_a_given_e - h_a_given_b)
