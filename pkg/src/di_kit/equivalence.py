"""Routed (two-state) models and their translation into single-state models.

A routed model has a long-range state ``rho_L`` and a short-range state
``rho_S`` on ``A x B x T`` with equal A-marginals. Translation purifies
``rho_L`` to ``chi`` on ``A B T E``, carries the tester onto ``B T E``
through the Uhlmann isometry between the purifications, and dilates the
compressed tester POVMs with one fixed ancilla embedding. The result is a
pure state on ``A x B~ x E'`` with ``B~ = B T`` and ``E' = E K``.
"""
from dataclasses import dataclass

import numpy as np

from .bell import correlations
from .entropy import cond_entropy, measured_cond_entropy
from .errors import MarginalMismatchError, ShapeError
from .linalg import hermitize, kron, partial_trace
from .states import (
    PVM,
    DensityMatrix,
    fixed_embedding_dilation,
    purify,
    random_density_matrix,
    random_pvm,
    random_unitary,
    uhlmann_isometry,
)

MARGINAL_TOL = 1e-9
STAT_TOL = 1e-8
ENTROPY_TOL = 1e-7


@dataclass(frozen=True)
class RoutedModel:
    rho_L: DensityMatrix
    rho_S: DensityMatrix
    alice_pvms: tuple
    bob_pvms: tuple
    tester_pvms: tuple
    validate: bool = True

    def __post_init__(self):
        for name in ("rho_L", "rho_S"):
            if len(getattr(self, name).dims) != 3:
                raise ShapeError(f"{name} must live on A x B x T")
        if self.rho_L.dims != self.rho_S.dims:
            raise ShapeError(f"rho_L dims {self.rho_L.dims} differ from rho_S dims {self.rho_S.dims}")
        if self.validate:
            dev = self.marginal_deviation()
            if dev > MARGINAL_TOL:
                raise MarginalMismatchError(f"A-marginals of rho_L and rho_S differ by {dev:.3e}")

    @property
    def dims(self):
        return self.rho_L.dims

    def marginal_deviation(self):
        return float(np.max(np.abs(self.rho_L.marginal([0]).mat - self.rho_S.marginal([0]).mat)))

    def long_range_table(self):
        """``p(a, b | x, y)`` from ``rho_L``."""
        return correlations(partial_trace(self.rho_L.mat, self.dims, [0, 1]), self.alice_pvms, self.bob_pvms)

    def tester_table(self):
        """``p(a, c | x, z)`` from ``rho_S``."""
        return correlations(partial_trace(self.rho_S.mat, self.dims, [0, 2]), self.alice_pvms, self.tester_pvms)


@dataclass(frozen=True)
class SingleStateModel:
    """Pure state on ``A x B~ x E x K`` with Bob PVMs on ``B~`` and tester PVMs on ``B~ E K``."""

    psi: np.ndarray
    dims: tuple
    alice_pvms: tuple
    bob_pvms: tuple
    tester_pvms: tuple
    uhlmann: np.ndarray
    embedding: np.ndarray

    def _rho(self):
        return np.outer(self.psi, self.psi.conj())

    def long_range_table(self):
        return correlations(partial_trace(self._rho(), self.dims, [0, 1]), self.alice_pvms, self.bob_pvms)

    def tester_table(self):
        return correlations(self._rho(), self.alice_pvms, self.tester_pvms)


def translate_routed_model(model):
    """Single-state model reproducing both tables of ``model`` and its ``H(A|E)``."""
    d_a, d_b, d_t = model.dims
    dim_l = np.linalg.matrix_rank(model.rho_L.mat, tol=1e-12, hermitian=True)
    dim_s = np.linalg.matrix_rank(model.rho_S.mat, tol=1e-12, hermitian=True)
    chi, dims_l = purify(model.rho_L)
    d_e = dims_l[-1]
    # pad the short-range environment so the Uhlmann map can be an isometry
    phi, _ = purify(model.rho_S, env_dim=max(d_e, dim_s, dim_l))
    w = uhlmann_isometry(chi, phi, d_a)
    d_es = phi.size // (d_a * d_b * d_t)
    compressed = []
    for pvm in model.tester_pvms:
        effects = []
        for proj in pvm.projectors:
            lifted = kron(np.eye(d_b), proj, np.eye(d_es))
            effects.append(hermitize(w.conj().T @ lifted @ w))
        compressed.append(effects)
    v_fixed, pvms, k_dim = fixed_embedding_dilation(compressed)
    # B~ = B x T with U_BT the identity; psi = (1_A x V)|chi>
    psi = (chi.reshape(d_a, -1) @ v_fixed.T).ravel()
    bob = tuple(
        PVM(tuple(np.kron(p, np.eye(d_t)) for p in pvm.projectors), input_label=pvm.input_label, validate=False)
        for pvm in model.bob_pvms
    )
    return SingleStateModel(
        psi=psi,
        dims=(d_a, d_b * d_t, d_e, k_dim),
        alice_pvms=tuple(model.alice_pvms),
        bob_pvms=bob,
        tester_pvms=tuple(pvms),
        uhlmann=w,
        embedding=v_fixed,
    )


@dataclass(frozen=True)
class EquivalenceReport:
    stat_deviation: float
    entropy_deviation: float
    h_source: float
    h_translated: float

    @property
    def passed(self):
        return self.stat_deviation <= STAT_TOL and self.entropy_deviation <= ENTROPY_TOL


def check_equivalence(model):
    """Translate ``model`` and compare both tables and the conditional entropies.

    The entropy deviation covers ``H(A|E)`` of the full A system and
    ``H(A_x|E)`` for each of Alice's measurements.
    """
    out = translate_routed_model(model)
    stat = max(
        float(np.max(np.abs(model.long_range_table().probs - out.long_range_table().probs))),
        float(np.max(np.abs(model.tester_table().probs - out.tester_table().probs))),
    )
    chi, dims_l = purify(model.rho_L)
    d_a, d_e = dims_l[0], dims_l[-1]
    rho_ae = partial_trace(np.outer(chi, chi.conj()), dims_l, [0, 3])
    h_src = cond_entropy(rho_ae, [1], dims=(d_a, d_e))
    rho_ae2 = partial_trace(np.outer(out.psi, out.psi.conj()), out.dims, [0, 2, 3])
    h_out = cond_entropy(rho_ae2, [1, 2], dims=(d_a, out.dims[2], out.dims[3]))
    ent = abs(h_src - h_out)
    for pvm in model.alice_pvms:
        hx = measured_cond_entropy(chi, dims_l, pvm, condition=3)
        hy = measured_cond_entropy(out.psi, out.dims, pvm, condition=[2, 3])
        ent = max(ent, abs(hx - hy))
    return EquivalenceReport(stat, ent, h_src, h_out)


def random_routed_model(rng, dims=(2, 2, 2), n_inputs=2, n_outputs=2, corrupt_marginal=False):
    """Random routed model with equal A-marginals by construction.

    ``rho_L`` is a random mixed state; ``rho_S`` comes from a Haar-random
    unitary on the purifying side of a padded purification of ``rho_L``,
    which leaves the A-marginal untouched. ``corrupt_marginal`` mixes a
    product term into ``rho_S`` that shifts its A-marginal.
    """
    d_a, d_b, d_t = dims
    rank = int(rng.integers(1, d_a * d_b * d_t + 1))
    rho_l = random_density_matrix(dims, rng, rank=rank)
    chi, pdims = purify(rho_l, env_dim=d_a * d_b * d_t)
    rest = chi.size // d_a
    phi = (chi.reshape(d_a, rest) @ random_unitary(rest, rng).T).ravel()
    rho_s = partial_trace(np.outer(phi, phi.conj()), pdims, [0, 1, 2])
    if corrupt_marginal:
        e0 = np.zeros((d_a, d_a))
        e0[0, 0] = 1.0
        rho_s = 0.8 * rho_s + 0.2 * np.kron(e0, partial_trace(rho_s, dims, [1, 2]))
    return RoutedModel(
        rho_L=rho_l,
        rho_S=DensityMatrix(hermitize(rho_s), dims),
        alice_pvms=tuple(random_pvm(d_a, n_outputs, rng, f"x={x}") for x in range(n_inputs)),
        bob_pvms=tuple(random_pvm(d_b, n_outputs, rng, f"y={y}") for y in range(n_inputs)),
        tester_pvms=tuple(random_pvm(d_t, n_outputs, rng, f"z={z}") for z in range(n_inputs)),
        validate=not corrupt_marginal,
    )
