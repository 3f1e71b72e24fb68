"""Dense primal-dual interior-point solver for moment relaxations.

Equality constraints are eliminated first, writing the moment vector as
``y = y0 + N z`` with ``z`` the free moments. The relaxation then reads

    moment side       max  b.z       s.t.  C - sum_j z_j A_j  >= 0
    certificate side  min  <C, X>    s.t.  <A_j, X> = b_j,  X >= 0

and weak duality makes ``<C, X>`` an upper bound for any feasible ``X``.
Search directions are HKM with a Mehrotra predictor-corrector.

An approximately feasible ``X`` is turned into a safe bound by clipping it to
the PSD cone and paying for the remaining residual ``r = b - A(X)``:
``b.z = <C - S, X> + r.z <= <C, X> + |r| |z|``. When all moments come from
products of involutions every ``|z_j| <= 1``, so ``|z| <= n`` with ``n`` the
moment-block size. For free (non-Hermitian) generators an a-priori norm
bound per letter bounds each moment instead.
"""
import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .. import kernels
from ..errors import SolverError

OPTIMAL = "Optimal"
MAX_ITER = "MaxIter"
INFEASIBLE = "Infeasible"

GAP_STOP = 1e-8
GAP_REPORT = 1e-6
RES_REPORT = 1e-7
MAX_ITERATIONS = 200
BLOWUP = 1e10


@dataclass
class SdpSolution:
    primal_value: float
    dual_value: float
    primal_residual: float
    dual_residual: float
    gap: float
    status: str
    certified: float = float("nan")
    rigor_shift: float = 0.0
    sense: str = "max"
    iterations: int = 0
    moments: np.ndarray = field(default=None, repr=False)
    message: str = ""

    def to_dict(self):
        return {
            "primal_value": self.primal_value,
            "dual_value": self.dual_value,
            "primal_residual": self.primal_residual,
            "dual_residual": self.dual_residual,
            "gap": self.gap,
            "status": self.status,
            "certified": self.certified,
            "rigor_shift": self.rigor_shift,
            "sense": self.sense,
            "iterations": self.iterations,
            "message": self.message,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def residual_summary(self):
        return {
            "primal_residual": self.primal_residual,
            "dual_residual": self.dual_residual,
            "gap": self.gap,
            "rigor_shift": self.rigor_shift,
            "status": self.status,
        }


@dataclass
class BlockSdp:
    """Data of ``max b.z s.t. C - sum z_j A_j >= 0`` over a list of symmetric blocks."""

    sizes: list
    c: list
    a_blocks: list
    b: np.ndarray

    def __post_init__(self):
        self.m = len(self.b)
        self._flat = []
        for n, (ptr, rows, cols, vals) in zip(self.sizes, self.a_blocks):
            owner = np.repeat(np.arange(self.m), np.diff(ptr))
            self._flat.append(sp.csr_matrix((vals, (owner, rows * n + cols)), shape=(self.m, n * n)))
        self.n_total = sum(self.sizes)

    def apply(self, ys):
        """``A(Y)_j = sum_blocks <A_j, Y>``."""
        out = np.zeros(self.m)
        for f, y in zip(self._flat, ys):
            out += f @ np.ascontiguousarray(y).ravel()
        return out

    def adjoint(self, z):
        return [(f.T @ z).reshape(n, n) for f, n in zip(self._flat, self.sizes)]


def _dot(xs, ys):
    return float(sum(np.vdot(x, y).real for x, y in zip(xs, ys)))


def _sym(m):
    return 0.5 * (m + m.T)


def _max_step(xs, dxs):
    """Largest ``alpha`` (capped at 1e6) keeping every ``X + alpha dX`` PSD."""
    alpha = 1e6
    for x, dx in zip(xs, dxs):
        try:
            low = np.linalg.cholesky(x)
        except np.linalg.LinAlgError:
            return 0.0
        t = sla.solve_triangular(low, dx, lower=True)
        t = sla.solve_triangular(low, t.T, lower=True)
        lam = np.linalg.eigvalsh(_sym(t))[0]
        if lam < 0:
            alpha = min(alpha, -1.0 / lam)
    return alpha


def _psd_clip(m):
    w, v = np.linalg.eigh(_sym(m))
    return (v * np.clip(w, 0, None)) @ v.T


def ipm(data, max_iter=MAX_ITERATIONS, gap_tol=GAP_STOP):
    """Solve a :class:`BlockSdp`; returns ``(X, z, S, info)``."""
    m = data.m
    b = data.b
    norm_a = max((math.sqrt(f.multiply(f).sum()) for f in data._flat), default=0.0)
    norm_c = math.sqrt(sum(float(np.sum(c * c)) for c in data.c))
    n_sqrt = math.sqrt(max(data.sizes))
    xi = max(10.0, n_sqrt, max((1 + abs(bj)) / (1 + norm_a) for bj in b) if m else 0.0)
    eta = max(10.0, n_sqrt, norm_c, norm_a)
    xs = [xi * np.eye(n) for n in data.sizes]
    ss = [eta * np.eye(n) for n in data.sizes]
    z = np.zeros(m)
    ntot = data.n_total
    norm_b = float(np.linalg.norm(b))

    info = {"iterations": 0, "status": MAX_ITER, "message": ""}
    best = None
    stall = 0
    for it in range(max_iter + 1):
        rp = b - data.apply(xs)
        at_z = data.adjoint(z)
        rds = [c - s - a for c, s, a in zip(data.c, ss, at_z)]
        pobj = _dot(data.c, xs)
        dobj = float(b @ z)
        mu = _dot(xs, ss) / ntot
        gap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
        rp_rel = float(np.linalg.norm(rp)) / (1 + norm_b)
        rd_rel = math.sqrt(sum(float(np.sum(r * r)) for r in rds)) / (1 + norm_c)
        info.update(iterations=it, gap=gap, rp=rp_rel, rd=rd_rel, pobj=pobj, dobj=dobj)
        merit = max(gap, rp_rel, rd_rel)
        if best is None or merit < best[0]:
            best = (merit, [x.copy() for x in xs], z.copy(), [s.copy() for s in ss], dict(info))
            stall = 0
        else:
            stall += 1
        if gap <= gap_tol and rp_rel <= gap_tol and rd_rel <= gap_tol:
            info["status"] = OPTIMAL
            break
        xnorm = max(float(np.max(np.abs(x))) for x in xs)
        if xnorm > BLOWUP or (m and float(np.max(np.abs(z))) > BLOWUP):
            info["status"] = INFEASIBLE
            info["message"] = "iterates diverged (relaxation infeasible or unbounded)"
            break
        if it == max_iter or stall > 25:
            info["message"] = "iteration limit" if it == max_iter else "no further progress"
            break

        try:
            sinvs = [np.linalg.inv(s) for s in ss]
            sinvs = [_sym(si) for si in sinvs]
        except np.linalg.LinAlgError:
            info["message"] = "slack lost definiteness"
            break
        schur = kernels.schur_complement(data.a_blocks, [np.ascontiguousarray(x) for x in xs],
                                         [np.ascontiguousarray(si) for si in sinvs], m)
        schur[np.diag_indices_from(schur)] += 1e-14 * max(1.0, float(np.max(np.abs(np.diag(schur))))) if m else 0.0
        try:
            factor = sla.cho_factor(schur) if m else None
        except np.linalg.LinAlgError:
            factor = None
            lu = sla.lu_factor(schur)

        def direction(rs):
            tmp = [r @ si - x @ rd @ si for r, si, x, rd in zip(rs, sinvs, xs, rds)]
            rhs = rp - data.apply(tmp)
            if not m:
                dz = np.zeros(0)
            elif factor is not None:
                dz = sla.cho_solve(factor, rhs)
            else:
                dz = sla.lu_solve(lu, rhs)
            at_dz = data.adjoint(dz)
            dss = [rd - a for rd, a in zip(rds, at_dz)]
            dxs = [_sym((r - x @ ds) @ si) for r, x, ds, si in zip(rs, xs, dss, sinvs)]
            return dxs, dz, dss

        r_aff = [-x @ s for x, s in zip(xs, ss)]
        dxa, dza, dsa = direction(r_aff)
        ap = min(1.0, _max_step(xs, dxa))
        ad = min(1.0, _max_step(ss, dsa))
        mu_aff = _dot([x + ap * dx for x, dx in zip(xs, dxa)], [s + ad * ds for s, ds in zip(ss, dsa)]) / ntot
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0
        r_cor = [sigma * mu * np.eye(x.shape[0]) - x @ s - dx @ ds for x, s, dx, ds in zip(xs, ss, dxa, dsa)]
        dxs, dz, dss = direction(r_cor)
        gamma = 0.9 + 0.08 * min(1.0, max(ap, ad))
        ap = min(1.0, gamma * _max_step(xs, dxs))
        ad = min(1.0, gamma * _max_step(ss, dss))
        if min(ap, ad) < 0.1:
            # blocked step: fall back to a strongly centred direction
            r_cen = [0.5 * mu * np.eye(x.shape[0]) - x @ s for x, s in zip(xs, ss)]
            dxc, dzc, dsc = direction(r_cen)
            apc = min(1.0, gamma * _max_step(xs, dxc))
            adc = min(1.0, gamma * _max_step(ss, dsc))
            if min(apc, adc) > min(ap, ad):
                dxs, dz, dss, ap, ad = dxc, dzc, dsc, apc, adc
        xs = [_sym(x + ap * dx) for x, dx in zip(xs, dxs)]
        ss = [_sym(s + ad * ds) for s, ds in zip(ss, dss)]
        z = z + ad * dz

    if info["status"] != OPTIMAL and best is not None and info["status"] != INFEASIBLE:
        _, xs, z, ss, saved = best
        saved.update(status=info["status"], message=info["message"], iterations=info["iterations"])
        info = saved
    return xs, z, ss, info


def _rref(mat, rhs, tol=1e-10):
    """Reduced row echelon form of ``[mat | rhs]``; returns ``(R, f, pivots, consistent)``."""
    a = np.array(mat, dtype=float)
    f = np.array(rhs, dtype=float)
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = r + int(np.argmax(np.abs(a[r:, c])))
        if abs(a[p, c]) <= tol:
            continue
        a[[r, p]] = a[[p, r]]
        f[[r, p]] = f[[p, r]]
        piv = a[r, c]
        a[r] /= piv
        f[r] /= piv
        others = np.arange(rows) != r
        factors = a[others, c].copy()
        a[others] -= np.outer(factors, a[r])
        f[others] -= factors * f[r]
        pivots.append(c)
        r += 1
    consistent = bool(np.all(np.abs(f[r:]) <= 1e-9))
    return a[:r], f[:r], pivots, consistent


def eliminate(problem):
    """Return ``(y0, N, consistent, free)``: feasible moments are ``y0 + N z`` with ``z = y[free]``."""
    nv = problem.n_vars
    e = np.zeros((len(problem.eq_constraints), nv))
    f = np.zeros(len(problem.eq_constraints))
    for i, (lin, target) in enumerate(problem.eq_constraints):
        for k, c in lin.items():
            e[i, k] += c
        f[i] = target
    r, fr, pivots, consistent = _rref(e, f)
    free = [k for k in range(nv) if k not in set(pivots)]
    y0 = np.zeros(nv)
    y0[pivots] = fr
    n = np.zeros((nv, len(free)))
    for j, k in enumerate(free):
        n[k, j] = 1.0
        n[pivots, j] = -r[:, k]
    n[np.abs(n) < 1e-15] = 0.0
    return y0, n, consistent, free


def _sparse_block(entries_per_constraint, m):
    """Pack per-constraint ``(rows, cols, vals)`` lists into the kernel's CSR-like layout."""
    ptr = np.zeros(m + 1, dtype=np.int64)
    rows, cols, vals = [], [], []
    for j, (r, c, v) in enumerate(entries_per_constraint):
        rows.append(r)
        cols.append(c)
        vals.append(v)
        ptr[j + 1] = ptr[j] + len(r)
    cat = lambda parts, dt: np.ascontiguousarray(np.concatenate(parts).astype(dt)) if parts else np.zeros(0, dt)  # noqa: E731
    return (ptr, cat(rows, np.int64), cat(cols, np.int64), cat(vals, np.float64))


def to_block_sdp(problem, y0, nmat):
    """Moment block and 1x1 cap blocks in the ``C - sum z_j A_j`` form."""
    sign = 1.0 if problem.sense == "max" else -1.0
    m = nmat.shape[1]
    grid = problem.grid
    size = grid.shape[0]
    c_mom = y0[grid]
    positions = [[] for _ in range(problem.n_vars)]
    for p in range(size):
        for q in range(size):
            positions[grid[p, q]].append((p, q))
    pos_arr = [np.array(ps, dtype=np.int64).reshape(-1, 2) for ps in positions]
    mom_entries = []
    for j in range(m):
        col = nmat[:, j]
        ks = np.flatnonzero(col)
        rr = [pos_arr[k][:, 0] for k in ks]
        cc = [pos_arr[k][:, 1] for k in ks]
        vv = [np.full(len(pos_arr[k]), -col[k]) for k in ks]
        mom_entries.append((np.concatenate(rr) if rr else np.zeros(0, np.int64),
                            np.concatenate(cc) if cc else np.zeros(0, np.int64),
                            np.concatenate(vv) if vv else np.zeros(0)))
    sizes = [size]
    cs = [c_mom]
    blocks = [_sparse_block(mom_entries, m)]
    for lin, cap in problem.caps:
        coef = np.zeros(problem.n_vars)
        for k, c in lin.items():
            coef[k] = c
        sizes.append(1)
        cs.append(np.array([[cap - coef @ y0]]))
        proj = coef @ nmat
        ent = []
        for j in range(m):
            if proj[j] != 0:
                ent.append((np.array([0]), np.array([0]), np.array([proj[j]])))
            else:
                ent.append((np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0)))
        blocks.append(_sparse_block(ent, m))
    obj = np.zeros(problem.n_vars)
    for k, c in problem.objective.items():
        obj[k] = c
    b = sign * (obj @ nmat)
    const = sign * (obj @ y0)
    return BlockSdp(sizes, cs, blocks, b), const


def solve_sdp(problem, max_iter=MAX_ITERATIONS, raise_on_failure=False):
    """Solve a :class:`MomentProblem`.

    ``certified`` on the result is a safe outer bound: an upper bound for
    ``sense="max"`` and a lower bound for ``sense="min"``.
    """
    sign = 1.0 if problem.sense == "max" else -1.0
    y0, nmat, consistent, free = eliminate(problem)
    if not consistent:
        sol = SdpSolution(math.nan, math.nan, math.inf, math.inf, math.inf, INFEASIBLE,
                          sense=problem.sense, message="equality constraints are inconsistent")
        if raise_on_failure:
            raise SolverError(sol.message, sol)
        return sol
    data, const = to_block_sdp(problem, y0, nmat)

    if data.m == 0:
        feasible = all(np.linalg.eigvalsh(_sym(c))[0] >= -1e-9 for c in data.c)
        val = sign * const
        sol = SdpSolution(val, val, 0.0, 0.0, 0.0, OPTIMAL if feasible else INFEASIBLE,
                          certified=val if feasible else math.nan, sense=problem.sense, moments=y0,
                          message="" if feasible else "fixed moments violate positivity")
        if raise_on_failure and not feasible:
            raise SolverError(sol.message, sol)
        return sol

    xs, z, ss, info = ipm(data, max_iter=max_iter)
    y = y0 + nmat @ z
    primal = sign * (const + float(data.b @ z))
    dual = sign * (const + _dot(data.c, xs))
    rp = data.b - data.apply(xs)
    rds = [c - s - a for c, s, a in zip(data.c, ss, data.adjoint(z))]
    dual_res = float(np.linalg.norm(rp))
    primal_res = math.sqrt(sum(float(np.sum(r * r)) for r in rds))
    gap = abs(primal - dual) / (1 + abs(primal) + abs(dual))

    status = info["status"]
    if status == OPTIMAL and not (gap <= GAP_REPORT and dual_res <= RES_REPORT and primal_res <= RES_REPORT):
        status = MAX_ITER
    if status == MAX_ITER and gap <= GAP_REPORT and dual_res <= RES_REPORT and primal_res <= RES_REPORT:
        status = OPTIMAL

    certified, shift = _certify(problem, data, xs, const, sign, free)
    sol = SdpSolution(
        primal_value=primal,
        dual_value=dual,
        primal_residual=primal_res,
        dual_residual=dual_res,
        gap=gap,
        status=status,
        certified=certified,
        rigor_shift=shift,
        sense=problem.sense,
        iterations=info["iterations"],
        moments=y,
        message=info.get("message", ""),
    )
    if raise_on_failure and status != OPTIMAL:
        raise SolverError(f"solver finished with status {status}: {sol.message}", sol)
    return sol


def _certify(problem, data, xs, const, sign, free, refinements=3):
    """Safe outer bound from the certificate-side iterate (see module notes).

    Each refinement projects ``X`` onto ``A(X) = b`` and clips it back to the
    PSD cone; the best resulting bound is kept, so refinement never hurts.
    """
    if problem.bounded_moments:
        caps = np.ones(len(free))
        block_cap = float(problem.block_size)
    else:
        caps = problem.var_bounds[free]
        block_cap = None
    gram = None
    best = (math.inf, math.inf)
    current = [_psd_clip(x) for x in xs]
    for step in range(refinements + 1):
        r = data.b - data.apply(current)
        if block_cap is not None:
            shift = float(np.linalg.norm(r)) * block_cap
        else:
            shift = float(np.sum(np.abs(r) * caps))
        value = const + _dot(data.c, current) + shift
        if value < best[0]:
            best = (value, shift)
        if step == refinements or not np.any(r):
            break
        if gram is None:
            gram = np.zeros((data.m, data.m))
            for f in data._flat:
                gram += (f @ f.T).toarray()
        w = np.linalg.lstsq(gram, r, rcond=None)[0]
        current = [_psd_clip(x + c) for x, c in zip(current, data.adjoint(w))]
    if not math.isfinite(best[0]):
        return math.nan, math.inf
    return sign * best[0], best[1]
