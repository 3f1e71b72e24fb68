"""Measurement statistics: Born-rule tables, CHSH and BB84 figures of merit.

Outcome index 0 corresponds to eigenvalue +1 of a dichotomic observable.
The CHSH game is won when ``a xor b == x * y`` with uniform inputs.
"""
import itertools
import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, RangeError, ShapeError
from .states import DensityMatrix, angle_pvm, werner_state

TSIRELSON_OMEGA = (2 + np.sqrt(2)) / 4
CLASSICAL_OMEGA = 0.75

ALICE_CHSH_ANGLES = (0.0, np.pi / 2)
FRED_CHSH_ANGLES = (np.pi / 4, -np.pi / 4)


@dataclass(frozen=True)
class StatisticsTable:
    """Conditional distribution ``p(a, b | x, y)`` stored as ``probs[x, y, a, b]``."""

    probs: np.ndarray
    validate: bool = True

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim != 4:
            raise ShapeError(f"probability table must be 4-dimensional, got shape {p.shape}")
        if self.validate:
            if p.min(initial=0.0) < -1e-12:
                raise RangeError(f"negative probability {p.min():.3e}")
            sums = p.sum(axis=(2, 3))
            if np.max(np.abs(sums - 1.0)) > 1e-9:
                raise RangeError("each p(., .|x, y) must sum to 1")
            res = self.no_signalling_residual(p)
            if res > 1e-9:
                raise RangeError(f"table signals (residual {res:.3e})")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def inputs(self):
        return self.probs.shape[:2]

    @property
    def outputs(self):
        return self.probs.shape[2:]

    @staticmethod
    def no_signalling_residual(p):
        pa = p.sum(axis=3)  # [x, y, a]
        pb = p.sum(axis=2)  # [x, y, b]
        ra = np.max(np.abs(pa - pa[:, :1, :]), initial=0.0)
        rb = np.max(np.abs(pb - pb[:1, :, :]), initial=0.0)
        return float(max(ra, rb))

    def alice_marginal(self, x):
        return self.probs[x, 0].sum(axis=1)

    def bob_marginal(self, y):
        return self.probs[0, y].sum(axis=0)

    def correlator(self, x, y):
        """``<A_x B_y>`` for binary outcomes mapped to +1 / -1."""
        self._need_binary()
        p = self.probs[x, y]
        return float(p[0, 0] + p[1, 1] - p[0, 1] - p[1, 0])

    def alice_mean(self, x):
        self._need_binary()
        m = self.alice_marginal(x)
        return float(m[0] - m[1])

    def bob_mean(self, y):
        self._need_binary()
        m = self.bob_marginal(y)
        return float(m[0] - m[1])

    def _need_binary(self):
        if self.outputs != (2, 2):
            raise ShapeError(f"binary outcomes required, table has {self.outputs}")

    def to_dict(self):
        x, y, a, b = self.probs.shape
        return {"x_count": x, "y_count": y, "a_count": a, "b_count": b, "probs": self.probs.tolist()}

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        probs = np.asarray(d["probs"], dtype=float)
        shape = (d["x_count"], d["y_count"], d["a_count"], d["b_count"])
        if probs.shape != tuple(shape):
            raise ShapeError(f"declared shape {shape} does not match probs {probs.shape}")
        return cls(probs)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class BB84Errors:
    q_x: float
    q_z: float

    def __post_init__(self):
        for name in ("q_x", "q_z"):
            v = getattr(self, name)
            if not -1e-12 <= v <= 1 + 1e-12:
                raise RangeError(f"{name} must lie in [0, 1], got {v}")
            object.__setattr__(self, name, float(min(max(v, 0.0), 1.0)))


def correlations(rho, alice_pvms, bob_pvms):
    """Born-rule table ``tr[rho (M_a|x x N_b|y)]`` for a bipartite state."""
    mat = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho)
    dims = rho.dims if isinstance(rho, DensityMatrix) else None
    na, nb = alice_pvms[0].dim, bob_pvms[0].dim
    if mat.shape[0] != na * nb or (dims is not None and tuple(dims) != (na, nb)):
        raise DimensionMismatchError(f"state of dimension {mat.shape[0]} does not match {na} x {nb}")
    a_count = {len(m) for m in alice_pvms}
    b_count = {len(m) for m in bob_pvms}
    if len(a_count) != 1 or len(b_count) != 1:
        raise ShapeError("all inputs of one party need the same number of outcomes")
    # tr[rho (M x N)] = sum M_{ij} N_{kl} rho_{(j,l),(i,k)}
    r = mat.reshape(na, nb, na, nb)
    probs = np.empty((len(alice_pvms), len(bob_pvms), a_count.pop(), b_count.pop()))
    for x, mx in enumerate(alice_pvms):
        for y, ny in enumerate(bob_pvms):
            for a, m in enumerate(mx.projectors):
                for b, n in enumerate(ny.projectors):
                    probs[x, y, a, b] = np.einsum("ij,kl,jlik->", m, n, r).real
    probs[(probs < 0) & (probs > -1e-12)] = 0.0
    return StatisticsTable(probs)


def chsh_winning_prob(t):
    if t.inputs != (2, 2) or t.outputs != (2, 2):
        raise ShapeError(f"CHSH needs 2 inputs and 2 outputs per side, got {t.probs.shape}")
    total = 0.0
    for x, y in itertools.product(range(2), repeat=2):
        total += sum(t.probs[x, y, a, b] for a in range(2) for b in range(2) if (a ^ b) == x * y)
    return float(total / 4)


def chsh_value(t):
    """``E00 + E01 + E10 - E11``."""
    return t.correlator(0, 0) + t.correlator(0, 1) + t.correlator(1, 0) - t.correlator(1, 1)


def chsh_epsilon(omega):
    if omega < -1e-12 or omega > TSIRELSON_OMEGA + 1e-12:
        raise RangeError(f"winning probability {omega} outside [0, (2+sqrt 2)/4]")
    return float(max(0.0, TSIRELSON_OMEGA - omega))


def bb84_errors(rho, alice, bob):
    """Error rates for Z and X measurement pairs; ``alice``/``bob`` are ``(Z, X)`` PVM pairs."""
    for m in (*alice, *bob):
        if len(m) != 2:
            raise ShapeError("BB84 error rates need binary measurements")
    t = correlations(rho, list(alice), list(bob))
    q_z = t.probs[0, 0, 0, 1] + t.probs[0, 0, 1, 0]
    q_x = t.probs[1, 1, 0, 1] + t.probs[1, 1, 1, 0]
    return BB84Errors(q_x=float(q_x), q_z=float(q_z))


def deterministic_table(alice_fn, bob_fn):
    """Table of the local deterministic strategy ``a = alice_fn(x)``, ``b = bob_fn(y)``."""
    p = np.zeros((2, 2, 2, 2))
    for x, y in itertools.product(range(2), repeat=2):
        p[x, y, alice_fn[x], bob_fn[y]] = 1.0
    return StatisticsTable(p)


def all_deterministic_tables():
    for fa in itertools.product(range(2), repeat=2):
        for fb in itertools.product(range(2), repeat=2):
            yield deterministic_table(fa, fb)


def chsh_pvms():
    alice = [angle_pvm(t, "A%d" % i) for i, t in enumerate(ALICE_CHSH_ANGLES)]
    fred = [angle_pvm(t, "F%d" % i) for i, t in enumerate(FRED_CHSH_ANGLES)]
    return alice, fred


def bb84_pvms():
    """``(Z, X)`` measurements for either party."""
    return [angle_pvm(0.0, "Z"), angle_pvm(np.pi / 2, "X")]


def werner_chsh_table(v):
    alice, fred = chsh_pvms()
    return correlations(werner_state(v), alice, fred)


def werner_bb84_table(v):
    """Alice ``(Z, X)`` against Bob ``(Z, X)`` on a Werner state."""
    return correlations(werner_state(v), bb84_pvms(), bb84_pvms())


def werner_chsh_omega(v):
    return 0.5 + v * np.sqrt(2) / 4
