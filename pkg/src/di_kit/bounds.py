"""Closed-form key-rate certificates.

Two chains are provided.

*Anticommutator chain.* For qubit observables ``A = a.sigma`` and
``B = b.sigma`` with angle ``theta`` between the Bloch vectors,
``{A, B} = 2 cos(theta) I``, so ``||{A, B}|| = 2|cos theta|`` and the maximal
overlap of the eigenbases is ``c = (1 + |cos theta|)/2``. The entropic
uncertainty relation then yields ``1 - log2(1 + N/2) - h(q)``.

*Moment converter.* By Jordan's lemma a pair of binary observables splits
into blocks of dimension at most two; block ``k`` with weight ``p_k`` and
angle ``theta_k`` contributes ``c_k = (1 + |cos theta_k|)/2`` to
``c* = sum_k p_k c_k`` and ``4 p_k cos^2 theta_k`` to the moment
``s = <{A, B}^2>``. Cauchy-Schwarz gives
``sum_k p_k |cos theta_k| <= sqrt(sum_k p_k cos^2 theta_k) = sqrt(s)/2``, hence
``c* <= 1/2 + sqrt(s)/4``. Any certified upper bound on ``s`` is therefore a
certified upper bound on the overlap.

*Self-testing chain.* A CHSH deficit ``epsilon`` is turned into a dilation
error ``delta = C sqrt(epsilon)`` with a configurable constant ``C``, then into
``c_A* <= 1/4 + 8 delta`` and ``c* <= 2 c_A*``.
"""
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .entropy import binary_entropy
from .errors import RangeError

TIERS = ("analytic-prop2", "analytic-thm1", "npo-eur", "npo-entropy")
_TOL = 1e-12


def _check_unit(name, q):
    if not 0.0 <= q <= 1.0:
        raise RangeError(f"{name} must lie in [0, 1], got {q}")


@dataclass(frozen=True)
class SelfTestParams:
    epsilon: float
    delta_constant: float = 1.0

    def __post_init__(self):
        if not self.epsilon >= 0.0:
            raise RangeError(f"epsilon must be non-negative, got {self.epsilon}")
        if not self.delta_constant > 0.0:
            raise RangeError(f"delta constant must be positive, got {self.delta_constant}")

    @property
    def delta(self):
        return self.delta_constant * math.sqrt(self.epsilon)


@dataclass(frozen=True)
class OverlapBound:
    c_star: float
    c_A_star: float = None

    def __post_init__(self):
        if not 0.5 - _TOL <= self.c_star <= 1.0 + _TOL:
            raise RangeError(f"c* must lie in [1/2, 1], got {self.c_star}")
        if self.c_A_star is not None:
            if not 0.25 - _TOL <= self.c_A_star <= 1.0 + _TOL:
                raise RangeError(f"c_A* must lie in [1/4, 1], got {self.c_A_star}")
            if self.c_star > 2 * self.c_A_star + _TOL:
                raise RangeError("c* exceeds 2 c_A*")


@dataclass(frozen=True)
class JordanBlocks:
    weights: tuple
    angles: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        t = np.asarray(self.angles, dtype=float)
        if w.shape != t.shape or w.ndim != 1 or not w.size:
            raise RangeError("weights and angles must be equally long non-empty lists")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-10:
            raise RangeError("block weights must form a distribution")
        if np.any(t < -_TOL) or np.any(t > np.pi + _TOL):
            raise RangeError("block angles must lie in [0, pi]")
        object.__setattr__(self, "weights", tuple(w))
        object.__setattr__(self, "angles", tuple(t))


@dataclass(frozen=True)
class RateCertificate:
    rate: float
    tier: str
    epsilon: float = None
    delta_constant: float = None
    c_star: float = None
    q_x: float = None
    q_z: float = None
    residuals: dict = field(default_factory=dict)
    vacuous: bool = False

    def __post_init__(self):
        if self.tier not in TIERS:
            raise RangeError(f"unknown tier {self.tier!r}")
        if self.tier == "analytic-thm1" and (self.epsilon is None or self.delta_constant is None):
            raise RangeError("a self-testing certificate must echo epsilon and the delta constant")
        if self.tier in ("analytic-prop2", "npo-eur") and self.c_star is None:
            raise RangeError(f"tier {self.tier} must record c*")

    def to_dict(self):
        d = asdict(self)
        d["residuals"] = dict(self.residuals)
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def overlap_from_anticommutator_norm(norm):
    if not 0.0 <= norm <= 2.0 + _TOL:
        raise RangeError(f"anticommutator norm must lie in [0, 2], got {norm}")
    return (1.0 + min(norm, 2.0) / 2) / 2


def prop2_rate(norm, q):
    c = overlap_from_anticommutator_norm(norm)
    _check_unit("q", q)
    rate = 1.0 - math.log2(1.0 + min(norm, 2.0) / 2) - binary_entropy(q)
    return RateCertificate(rate=rate, tier="analytic-prop2", c_star=c, q_x=q, q_z=q)


def overlap_from_moment_bound(s):
    if not -_TOL <= s <= 4.0 + 1e-9:
        raise RangeError(f"anticommutator-square moment must lie in [0, 4], got {s}")
    return 0.5 + math.sqrt(min(max(s, 0.0), 4.0)) / 4


def eur_rate(c_star, q_x, q_z, tier="npo-eur", residuals=None):
    if not 0.5 - _TOL <= c_star <= 1.0 + _TOL:
        raise RangeError(f"c* must lie in [1/2, 1], got {c_star}")
    _check_unit("q_x", q_x)
    _check_unit("q_z", q_z)
    rate = -math.log2(c_star) - binary_entropy(q_x) - binary_entropy(q_z)
    return RateCertificate(
        rate=rate, tier=tier, c_star=c_star, q_x=q_x, q_z=q_z, residuals=dict(residuals or {})
    )


def thm1_rate(params, q_x, q_z):
    _check_unit("q_x", q_x)
    _check_unit("q_z", q_z)
    delta = params.delta
    c_a = 0.25 + 8.0 * delta
    errors = binary_entropy(q_x) + binary_entropy(q_z)
    if c_a <= 1.0:
        rate = 1.0 - math.log2(1.0 + 32.0 * delta) - errors
        vacuous = False
    else:
        c_a = 1.0
        rate = -1.0 - errors
        vacuous = True
    return RateCertificate(
        rate=rate,
        tier="analytic-thm1",
        epsilon=params.epsilon,
        delta_constant=params.delta_constant,
        c_star=min(1.0, 2.0 * c_a),
        q_x=q_x,
        q_z=q_z,
        residuals={"delta": delta, "c_A_star": c_a},
        vacuous=vacuous,
    )


def jordan_overlap_oracle(blocks):
    w = np.asarray(blocks.weights)
    cos = np.cos(np.asarray(blocks.angles))
    c_star = float(np.sum(w * (1 + np.abs(cos)) / 2))
    moment = float(4 * np.sum(w * cos**2))
    return c_star, moment


def anticom_com_identity_residual(anticom_sq, com_sq):
    """Deviation from ``<{A,B}^2> + <[A,B]^+[A,B]> = 4`` for involutions ``A``, ``B``."""
    return abs(anticom_sq + com_sq - 4.0)
