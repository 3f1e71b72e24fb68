"""Concrete quantum objects: density matrices, PVMs, qubit observables,
purifications, Uhlmann isometries and Naimark dilations."""
from dataclasses import dataclass, field
from math import prod

import numpy as np

from .errors import (
    InvalidMeasurementError,
    InvalidStateError,
    MarginalMismatchError,
    NotAPOVMError,
    RangeError,
)
from .linalg import (
    PAULIS,
    FactorSpace,
    eigh,
    hermitize,
    is_hermitian,
    orthonormal_complement,
    partial_trace,
    psd_sqrt,
)

STATE_TOL = 1e-10
RANK_TOL = 1e-12


@dataclass(frozen=True)
class DensityMatrix:
    """Unit-trace positive semidefinite matrix on a tensor-factor space."""

    mat: np.ndarray
    dims: tuple = None
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        mat = np.array(self.mat, dtype=complex)
        dims = (mat.shape[0],) if self.dims is None else tuple(int(d) for d in self.dims)
        if mat.ndim != 2 or mat.shape != (prod(dims), prod(dims)):
            raise InvalidStateError(f"matrix shape {mat.shape} incompatible with dims {dims}")
        if self.validate:
            if not is_hermitian(mat, STATE_TOL):
                raise InvalidStateError("density matrix is not Hermitian")
            tr = np.trace(mat).real
            if abs(tr - 1.0) > STATE_TOL:
                raise InvalidStateError(f"trace {tr:.12g} differs from 1")
            lam = eigh(mat, tol=STATE_TOL)[0]
            if lam.size and lam[0] < -STATE_TOL:
                raise InvalidStateError(f"negative eigenvalue {lam[0]:.3e}")
        mat.setflags(write=False)
        object.__setattr__(self, "mat", mat)
        object.__setattr__(self, "dims", dims)

    @property
    def space(self):
        return FactorSpace(self.dims)

    @property
    def dim(self):
        return self.mat.shape[0]

    def marginal(self, keep):
        keep = sorted(keep)
        sub = partial_trace(self.mat, self.dims, keep)
        return DensityMatrix(hermitize(sub), tuple(self.dims[k] for k in keep), validate=False)

    def expect(self, op):
        return float(np.real(np.trace(self.mat @ op)))

    @classmethod
    def from_vector(cls, psi, dims=None):
        psi = np.asarray(psi, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), dims)


@dataclass(frozen=True)
class PVM:
    """Projective measurement: a complete family of orthogonal projectors."""

    projectors: tuple
    input_label: str = ""
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        projs = tuple(np.array(p, dtype=complex) for p in self.projectors)
        if not projs:
            raise InvalidMeasurementError("a PVM needs at least one outcome")
        d = projs[0].shape[0]
        if self.validate:
            total = np.zeros((d, d), dtype=complex)
            for i, p in enumerate(projs):
                if p.shape != (d, d) or not is_hermitian(p, STATE_TOL):
                    raise InvalidMeasurementError(f"projector {i} is not a Hermitian {d}x{d} matrix")
                if np.max(np.abs(p @ p - p)) > STATE_TOL:
                    raise InvalidMeasurementError(f"projector {i} is not idempotent")
                for j in range(i):
                    if np.max(np.abs(p @ projs[j])) > STATE_TOL:
                        raise InvalidMeasurementError(f"projectors {j} and {i} are not orthogonal")
                total += p
            if np.max(np.abs(total - np.eye(d))) > STATE_TOL:
                raise InvalidMeasurementError("projectors do not sum to the identity")
        object.__setattr__(self, "projectors", projs)

    def __len__(self):
        return len(self.projectors)

    def __getitem__(self, i):
        return self.projectors[i]

    @property
    def dim(self):
        return self.projectors[0].shape[0]

    def observable(self):
        """``P_0 - P_1`` for a two-outcome measurement."""
        if len(self.projectors) != 2:
            raise InvalidMeasurementError("observable() needs a two-outcome PVM")
        return self.projectors[0] - self.projectors[1]


@dataclass(frozen=True)
class DichotomicObservable:
    """Qubit observable ``b . sigma`` with outcomes +1 / -1."""

    bloch: tuple

    def __post_init__(self):
        b = np.asarray(self.bloch, dtype=float).ravel()
        if b.shape != (3,) or abs(np.linalg.norm(b) - 1.0) > 1e-12:
            raise RangeError(f"Bloch vector must be a unit 3-vector, got {self.bloch}")
        object.__setattr__(self, "bloch", tuple(b))

    @classmethod
    def at_angle(cls, theta):
        """Observable ``cos(theta) Z + sin(theta) X`` in the x-z plane."""
        return cls((np.sin(theta), 0.0, np.cos(theta)))

    @property
    def matrix(self):
        return sum(c * s for c, s in zip(self.bloch, PAULIS))


def bloch_pvm(obs, label=""):
    """Eigenprojectors ``(I + a.sigma)/2`` (outcome +1, index 0) and ``(I - a.sigma)/2``."""
    a = obs.matrix
    eye = np.eye(2)
    return PVM(((eye + a) / 2, (eye - a) / 2), input_label=label)


def angle_pvm(theta, label=""):
    return bloch_pvm(DichotomicObservable.at_angle(theta), label)


def phi_plus():
    return np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


def werner_state(v):
    """``v |Phi+><Phi+| + (1 - v) I/4`` on two qubits."""
    if not 0.0 <= v <= 1.0:
        raise RangeError(f"visibility must lie in [0, 1], got {v}")
    phi = phi_plus()
    mat = v * np.outer(phi, phi.conj()) + (1.0 - v) * np.eye(4) / 4
    return DensityMatrix(mat, (2, 2))


def bell_basis():
    """Columns ``Phi+, Phi-, Psi+, Psi-``."""
    s = 1 / np.sqrt(2)
    return np.array(
        [[s, s, 0, 0], [0, 0, s, s], [0, 0, s, -s], [s, -s, 0, 0]],
        dtype=complex,
    )


def bell_diagonal_state(weights):
    """Mixture of ``Phi+, Phi-, Psi+, Psi-`` with the given weights."""
    w = np.asarray(weights, dtype=float)
    if w.shape != (4,) or np.any(w < -1e-12) or abs(w.sum() - 1) > 1e-10:
        raise RangeError(f"Bell-diagonal weights must be a probability 4-vector, got {weights}")
    basis = bell_basis()
    return DensityMatrix((basis * np.clip(w, 0, None)) @ basis.conj().T, (2, 2))


def purify(rho, env_dim=None):
    """Purification ``sum_i sqrt(l_i) |i>|i>`` of ``rho``.

    The environment has dimension equal to the numerical rank of ``rho``
    (eigenvalues above ``1e-12``) unless ``env_dim`` asks for a larger,
    zero-padded environment. Returns ``(psi, dims)`` with ``psi`` a vector on
    ``rho.dims + (env,)``.
    """
    mat = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho)
    dims = rho.dims if isinstance(rho, DensityMatrix) else (mat.shape[0],)
    lam, vecs = eigh(mat, tol=STATE_TOL)
    support = np.flatnonzero(lam > RANK_TOL)[::-1]
    rank = max(len(support), 1)
    env = rank if env_dim is None else int(env_dim)
    if env < rank:
        raise RangeError(f"environment dimension {env} below rank {rank}")
    d = mat.shape[0]
    psi = np.zeros((d, env), dtype=complex)
    for slot, i in enumerate(support):
        psi[:, slot] = np.sqrt(lam[i]) * vecs[:, i]
    if not len(support):
        psi[:, 0] = vecs[:, -1]
    psi = psi.ravel()
    return psi / np.linalg.norm(psi), tuple(dims) + (env,)


def _schmidt_vectors(psi, dim_a, eig_a):
    """Vectors ``(<e_i| x 1)|psi> / sqrt(l_i)`` for the given eigenbasis of the A-marginal."""
    lam, basis = eig_a
    mat = np.asarray(psi).reshape(dim_a, -1)
    keep = np.flatnonzero(lam > RANK_TOL)
    vecs = (basis[:, keep].conj().T @ mat).T / np.sqrt(lam[keep])
    return vecs


def uhlmann_isometry(chi, phi, dim_a, tol=1e-9):
    """Isometry ``W: R1 -> R2`` with ``(1_A x W)|chi> = |phi>``.

    ``chi`` lives on ``A x R1`` and ``phi`` on ``A x R2`` with
    ``dim R2 >= dim R1``; both are flattened vectors with ``A`` as the leading
    factor. Schmidt vectors are paired through one fixed eigenbasis of the
    common A-marginal (degenerate eigenspaces included) and the map is
    extended to an isometry on all of ``R1``.
    """
    chi = np.asarray(chi, dtype=complex).ravel()
    phi = np.asarray(phi, dtype=complex).ravel()
    c = chi.reshape(dim_a, -1)
    p = phi.reshape(dim_a, -1)
    r1, r2 = c.shape[1], p.shape[1]
    rho_c = c @ c.conj().T
    rho_p = p @ p.conj().T
    dev = np.max(np.abs(rho_c - rho_p))
    if dev > tol:
        raise MarginalMismatchError(f"A-marginals differ by {dev:.3e}")
    if r2 < r1:
        raise RangeError(f"target purifying space ({r2}) smaller than source ({r1})")
    eig_a = eigh(hermitize(rho_c), tol=1e-8)
    f = _schmidt_vectors(chi, dim_a, eig_a)
    g = _schmidt_vectors(phi, dim_a, eig_a)
    # re-orthonormalise the targets (marginals agree only to tolerance)
    u, _, vh = np.linalg.svd(g, full_matrices=False)
    g = u @ vh
    w = g @ f.conj().T
    f_perp = orthonormal_complement(f, r1)
    g_perp = orthonormal_complement(g, r2)[:, : f_perp.shape[1]]
    return w + g_perp @ f_perp.conj().T


def _check_povm(effects, tol):
    effects = [np.asarray(e, dtype=complex) for e in effects]
    if not effects:
        raise NotAPOVMError("empty effect list")
    d = effects[0].shape[0]
    total = np.zeros((d, d), dtype=complex)
    for i, e in enumerate(effects):
        if e.shape != (d, d) or not is_hermitian(e, tol):
            raise NotAPOVMError(f"effect {i} is not Hermitian")
        if eigh(hermitize(e), tol=tol)[0][0] < -tol:
            raise NotAPOVMError(f"effect {i} is not positive semidefinite")
        total += e
    if np.max(np.abs(total - np.eye(d))) > tol:
        raise NotAPOVMError("effects do not sum to the identity")
    return effects


def naimark_dilate(effects, tol=1e-9):
    """Canonical Naimark dilation of a POVM.

    Returns ``(V, pvm)`` where ``V: H -> H x K`` maps ``|x>`` to
    ``sum_c sqrt(E_c)|x> x |c>`` and ``pvm`` holds the projectors
    ``1_H x |c><c|``, so that ``V^+ P_c V = E_c``.
    """
    effects = _check_povm(effects, tol)
    d, m = effects[0].shape[0], len(effects)
    roots = [psd_sqrt(hermitize(e)) for e in effects]
    v = np.zeros((d * m, d), dtype=complex)
    for c, r in enumerate(roots):
        v[c::m, :] = r
    projs = []
    for c in range(m):
        k = np.zeros((m, m))
        k[c, c] = 1.0
        projs.append(np.kron(np.eye(d), k))
    return v, PVM(tuple(projs), input_label="naimark")


def fixed_embedding_dilation(povms, tol=1e-9):
    """Dilate several POVMs on ``H`` with one shared ancilla and one embedding.

    The ancilla is ``K = (+)_z C^{m_z}`` with basis ``|z, c>`` and the fixed
    embedding is ``V|x> = |x> x |0>`` where ``|0>`` is the first basis vector
    of the first block. For each ``z`` a unitary ``W_z`` with
    ``W_z (1 x J_z) V_z = V`` turns the canonical dilation ``V_z`` into
    projectors ``W_z (1 x |z,c><z,c|) W_z^+``; the part of the identity outside
    block ``z`` is merged into outcome 0 so each family is complete.

    Returns ``(V, pvms, k_dim)``.
    """
    povms = [_check_povm(p, tol) for p in povms]
    d = povms[0][0].shape[0]
    sizes = [len(p) for p in povms]
    k_dim = sum(sizes)
    big = d * k_dim
    v_fixed = np.zeros((big, d), dtype=complex)
    v_fixed[0::k_dim, :] = np.eye(d)
    offsets = np.cumsum([0] + sizes[:-1])
    v_perp = orthonormal_complement(v_fixed, big)
    out = []
    for z, effects in enumerate(povms):
        y = np.zeros((big, d), dtype=complex)
        for c, e in enumerate(effects):
            y[offsets[z] + c::k_dim, :] = psd_sqrt(hermitize(e))
        y_perp = orthonormal_complement(y, big)
        w_z = v_fixed @ y.conj().T + v_perp @ y_perp.conj().T
        projs = []
        for c in range(len(effects)):
            k = np.zeros((k_dim, k_dim))
            k[offsets[z] + c, offsets[z] + c] = 1.0
            projs.append(hermitize(w_z @ np.kron(np.eye(d), k) @ w_z.conj().T))
        projs[0] = projs[0] + (np.eye(big) - sum(projs))
        out.append(PVM(tuple(hermitize(p) for p in projs), input_label=f"z={z}", validate=False))
    return v_fixed, out, k_dim


def random_unitary(d, rng):
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_pure_state(d, rng):
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    return psi / np.linalg.norm(psi)


def random_density_matrix(dims, rng, rank=None):
    dims = tuple(dims)
    d = prod(dims)
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    mat = g @ g.conj().T
    return DensityMatrix(hermitize(mat / np.trace(mat).real), dims)


def random_pvm(d, n_outcomes, rng, label=""):
    """Random projective measurement on ``C^d`` with ``n_outcomes`` (possibly zero) projectors."""
    u = random_unitary(d, rng)
    cuts = np.sort(rng.integers(0, d + 1, size=n_outcomes - 1))
    bounds = [0, *cuts, d]
    projs = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        cols = u[:, lo:hi]
        projs.append(cols @ cols.conj().T)
    return PVM(tuple(hermitize(p) for p in projs), input_label=label)


def random_povm(d, n_effects, rng):
    """Random POVM with ``n_effects`` full-rank effects on ``C^d``."""
    gs = []
    for _ in range(n_effects):
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        gs.append(g @ g.conj().T)
    total = sum(gs)
    w, v = eigh(hermitize(total))
    inv_root = (v / np.sqrt(w)) @ v.conj().T
    return [hermitize(inv_root @ g @ inv_root) for g in gs]
