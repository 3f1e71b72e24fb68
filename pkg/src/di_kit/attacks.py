"""Explicit models used as upper ceilings for certified key rates.

Each model is a flagged mixture. With probability ``p`` Alice's two
measurements are classical bits read off a hidden register that Eve holds
(so they commute and ``<{A_Z, A_X}^2> = 4`` on that branch), and Bob copies
those bits in the long-range rounds. With probability ``1 - p`` the parties
share a Bell-diagonal two-qubit state measured in Z and X. Eve learns
nothing extra from the flag beyond the classical branch.

The classical branch reproduces the local CHSH test of a Werner(v) table
exactly as long as ``p <= (2 + sqrt 2)(1 - v)``: the remainder
``(v - 1 + p)/p`` of ideal correlations mixed with white noise is then
local. Relaxed models instead only respect a moment cap ``cap`` on
``<{A_Z, A_X}^2>``, which for a quantum branch at angle ``theta`` reads
``4 p + 4 (1 - p) cos^2 theta <= cap``.
"""
from dataclasses import dataclass

import numpy as np

from .entropy import binary_entropy, measured_cond_entropy
from .errors import RangeError
from .states import angle_pvm, bell_diagonal_state, purify

U_POINTS = 21
P_POINTS = 41
ANGLE_STEP_DEG = 1.0


def p_max_exact(v):
    """Largest classical weight compatible with the Werner(v) local CHSH table."""
    return min(1.0, (2 + np.sqrt(2)) * (1 - v))


def bell_diagonal_weights(q_block, u):
    """``(Phi+, Phi-, Psi+, Psi-)`` weights with Z and X error rates both ``q_block``."""
    return np.array([1 - q_block - u, u, u, q_block - u])


def block_entropy(weights):
    """``H(Z_A|E)`` for a Bell-diagonal state, via a purification."""
    psi, dims = purify(bell_diagonal_state(weights))
    return measured_cond_entropy(psi, dims, angle_pvm(0.0), condition=2, measured=0)


def mixture_rate(qber, p, u_points=U_POINTS):
    """Smallest ``(1-p) H(Z_A|E)_block - h(qber)`` over the admissible Bell-diagonal family."""
    if p >= 1.0:
        return -binary_entropy(qber)
    q_block = qber / (1 - p)
    if q_block > 0.5:
        return None
    best = np.inf
    for u in np.linspace(0.0, q_block, u_points):
        h = block_entropy(bell_diagonal_weights(q_block, u))
        best = min(best, (1 - p) * h - binary_entropy(qber))
    return float(best)


@dataclass(frozen=True)
class AttackCeiling:
    qber: float
    exact: float
    relaxed: float
    p_exact: float
    p_relaxed: float


def _scan(qber, p_hi):
    best, arg = np.inf, 0.0
    for p in np.linspace(0.0, p_hi, P_POINTS):
        r = mixture_rate(qber, p)
        if r is not None and r < best:
            best, arg = r, float(p)
    return best, arg


def attack_oracle(qber, local_visibilities, caps=None):
    """Ceilings on any certified rate at ``qber``.

    ``local_visibilities`` lists the Werner visibilities of the local tests
    that constrain Alice (first entry) and optionally Bob. ``caps`` lists the
    corresponding moment caps; if given, cap-feasible models (searched over
    a measurement-angle grid) bound rates certified from the relaxation.
    Returns an :class:`AttackCeiling` with the exact-model ceiling and the
    combined ceiling including relaxed models.
    """
    if not 0.0 <= qber <= 0.5:
        raise RangeError(f"QBER must lie in [0, 1/2], got {qber}")
    vis = list(np.atleast_1d(local_visibilities))
    p_exact = min(p_max_exact(v) for v in vis)
    exact, _ = _scan(qber, p_exact)
    relaxed = exact
    p_relaxed = p_exact
    if caps:
        cap = min(caps)
        p_cap = 0.0
        for deg in np.arange(0.0, 90.0 + ANGLE_STEP_DEG / 2, ANGLE_STEP_DEG):
            c2 = np.cos(np.radians(deg)) ** 2
            # 4 p + 4 (1 - p) c2 <= cap
            if 4 * c2 <= cap:
                p_cap = max(p_cap, (cap - 4 * c2) / (4 * (1 - c2)))
        p_relaxed = max(p_exact, min(1.0, p_cap))
        relaxed = min(exact, _scan(qber, p_relaxed)[0])
    return AttackCeiling(qber, float(exact), float(relaxed), p_exact, p_relaxed)
