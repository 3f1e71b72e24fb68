"""Variational lower bound on ``H(Z_A|E)`` from a Gauss-Radau quadrature.

For nodes ``t_1 < ... < t_m = 1`` with weights ``w_i`` on ``[0, 1]``,

    H(Z_A|E) >= sum_{i<m} w_i / (t_i ln 2) * (1 + v_i),
    v_i = inf sum_a < M_a (Z_a + Z_a^+ + (1 - t_i) Z_a^+ Z_a) + t_i Z_a Z_a^+ >

where ``M_a = (1 + (-1)^a A_Z)/2`` and the infimum runs over Eve operators
``Z_a`` commuting with Alice and Bob. Each ``v_i`` is lower-bounded by a
moment relaxation in which Eve's operators form a free party.

Enabled only when ``DI_KIT_ENTROPY_TIER=1`` or the scenario sets
``enable_entropy_tier``.
"""
import math
import os

import numpy as np
from numpy.polynomial import legendre

from ..bounds import RateCertificate
from ..entropy import binary_entropy
from ..errors import NodesOutOfRangeError, SolverError
from .moments import build_moment_problem
from .sdp import OPTIMAL, solve_sdp
from .selftest import bb84_constraints, kernel_rules
from .words import FREE, Algebra, Party, anticommutator_sq, gen, poly_add, poly_mul, poly_scale

ENV_FLAG = "DI_KIT_ENTROPY_TIER"


def entropy_tier_enabled(config_flag=False):
    return bool(config_flag) or os.environ.get(ENV_FLAG, "").strip() not in ("", "0")


def gauss_radau(m):
    """``m`` nodes on ``[0, 1]`` with the last node fixed at 1, ascending, and their weights."""
    if not 2 <= m <= 8:
        raise NodesOutOfRangeError(f"number of nodes must lie in 2..8, got {m}")
    # Radau rule on [-1, 1] fixed at -1: interior nodes are the roots of (P_{m-1} + P_m)/(1 + x)
    coeffs = np.zeros(m + 1)
    coeffs[m - 1] = 1.0
    coeffs[m] = 1.0
    roots = np.sort(np.real(legendre.legroots(coeffs)))
    roots[0] = -1.0
    pm1 = legendre.legval(roots, np.eye(m)[m - 1])
    w = (1 - roots) / (m * m * pm1**2)
    w[0] = 2.0 / (m * m)
    # reflect so that the fixed node sits at +1, then map to [0, 1]
    t = (1 - roots) / 2
    order = np.argsort(t)
    return t[order], (w / 2)[order]


def quadrature_gap(m):
    """Shortfall of the ``m``-node bound on the noiseless model, whose entropy is one bit."""
    t, w = gauss_radau(m)
    return float(1.0 - _ideal_bound(t, w))


def _ideal_bound(t, w):
    # Eve uncorrelated and Z_A uniform: H = 1 bit. The per-node infimum then
    # separates into scalars: min_z p (2z + (1-t) z^2) + t z^2 over real z.
    total = 0.0
    for ti, wi in zip(t[:-1], w[:-1]):
        p = 0.5
        val = 0.0
        for _ in range(2):
            z = -p / (p * (1 - ti) + ti)
            val += p * (2 * z + (1 - ti) * z * z) + ti * z * z
        total += wi / (ti * math.log(2)) * (1 + val)
    return total


def eve_norm_sq(t):
    """Bound on ``Z^+ Z`` that does not change the per-node infimum."""
    return 1.5 * max(1.0 / t, 1.0 / (1.0 - t))


def _node_objective(t):
    obj = {}
    for a in range(2):
        sign = 1.0 if a == 0 else -1.0
        m_a = poly_add({(): 0.5}, poly_scale(gen("A", 0), 0.5 * sign))
        z = gen("E", a)
        zd = gen("E", a, True)
        inner = poly_add(z, zd, poly_scale(poly_mul(zd, z), 1 - t))
        obj = poly_add(obj, poly_mul(m_a, inner), poly_scale(poly_mul(z, zd), t))
    return obj


def bff_entropy_bound(long_range_stats, side_bounds=(), m_nodes=4, level=2, q_x=None, q_z=None):
    """Certified lower bound on ``H(Z_A|E)`` and the resulting key rate.

    ``side_bounds`` is a list of ``(side, s_max)`` with side ``"A"`` or
    ``"B"``. Returns a :class:`RateCertificate` (tier ``npo-entropy``) whose
    ``residuals`` carry the entropy bound and per-node solver summaries.
    """
    t, w = gauss_radau(m_nodes)
    algebra = Algebra((Party("A", 2), Party("B", 2), Party("E", 2, FREE)))
    caps = {}
    for side, s in side_bounds:
        caps[side] = min(caps.get(side, 4.0), float(s))
    cap_terms = [(anticommutator_sq((side, 0), (side, 1)), s) for side, s in sorted(caps.items())]
    stats = bb84_constraints(long_range_stats)
    total = 0.0
    nodes = []
    for ti, wi in zip(t[:-1], w[:-1]):
        problem = build_moment_problem(
            algebra,
            level,
            stats=stats,
            objective=_node_objective(ti),
            sense="min",
            caps=cap_terms,
            letter_norms={"E": math.sqrt(eve_norm_sq(ti))},
            kernel_rules=kernel_rules(stats, caps),
        )
        sol = solve_sdp(problem)
        if not math.isfinite(sol.certified):
            raise SolverError(f"node t={ti:.6f}: no certifiable bound ({sol.status})", sol)
        nodes.append({"t": float(ti), "w": float(wi), "value": float(sol.certified), "status": sol.status})
        total += wi / (ti * math.log(2)) * (1 + sol.certified)
    h_bound = min(1.0, total)
    if q_z is None:
        p = long_range_stats.probs
        q_z = float(p[0, 0, 0, 1] + p[0, 0, 1, 0])
        q_x = float(p[1, 1, 0, 1] + p[1, 1, 1, 0])
    return RateCertificate(
        rate=h_bound - binary_entropy(q_z),
        tier="npo-entropy",
        q_x=q_x,
        q_z=q_z,
        residuals={
            "entropy_bound": h_bound,
            "m_nodes": m_nodes,
            "caps": caps,
            "nodes": nodes,
            "all_optimal": all(n["status"] == OPTIMAL for n in nodes),
        },
    )
