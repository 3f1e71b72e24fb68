"""Pure-Python versions of the compiled kernels in ``_kernels.pyx``.

Same algorithms, same conventions; used when the extension is not built or
when ``DI_KIT_PURE_PYTHON=1`` is set.
"""
import math

import numpy as np
import scipy.sparse as sp


class KernelNoConvergence(RuntimeError):
    pass


_EPS = np.finfo(float).eps


def eigh_hermitian(a_in, max_iter=60):
    a = np.array(a_in, dtype=np.complex128, copy=True)
    n = a.shape[0]
    q = np.eye(n, dtype=np.complex128)
    if n == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=np.complex128)

    for k in range(n - 2):
        col = a[k + 1:, k]
        tail = float(np.vdot(col[1:], col[1:]).real)
        if tail == 0.0:
            continue
        x0 = col[0]
        ax0 = abs(x0)
        xnorm = math.sqrt(tail + ax0 * ax0)
        phase = x0 / ax0 if ax0 > 0.0 else 1.0
        v = col.copy()
        v[0] += phase * xnorm
        v /= np.linalg.norm(v)
        sub = a[k:, k + 1:]
        p = sub @ v
        kk = float(np.vdot(v, p[1:]).real)
        w = p.copy()
        w[1:] -= kk * v
        vf = np.concatenate(([0.0], v))
        a[k:, k:] -= 2.0 * (np.outer(vf, w.conj()) + np.outer(w, vf.conj()))
        qv = q[:, k + 1:] @ v
        q[:, k + 1:] -= 2.0 * np.outer(qv, v.conj())

    d = a.diagonal().real.copy()
    sub = a.diagonal(-1)
    e = np.zeros(n)
    e[: n - 1] = np.abs(sub)
    phases = np.ones(n, dtype=np.complex128)
    for k in range(n - 1):
        if e[k] > 0.0:
            phases[k + 1] = phases[k] * (sub[k] / e[k])
        else:
            phases[k + 1] = phases[k]

    z = np.eye(n)
    _tql(d, e, z, n, max_iter)
    order = np.argsort(d, kind="stable")
    vecs = (q * phases[None, :]) @ z
    return d[order], vecs[:, order]


def _tql(d, e, z, n, max_iter):
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= _EPS * dd:
                    break
                m += 1
            if m == l:
                break
            if it == max_iter:
                raise KernelNoConvergence("QL iteration did not converge")
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            underflow = False
            i = m - 1
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi = z[:, i].copy()
                z[:, i] = c * zi - s * z[:, i + 1]
                z[:, i + 1] = s * zi + c * z[:, i + 1]
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0


def schur_complement(blocks, xs, sinvs, m):
    out = np.zeros((m, m))
    for (ptr, rows, cols, vals), x, si in zip(blocks, xs, sinvs):
        n = x.shape[0]
        nnz = ptr[-1]
        if nnz == 0:
            continue
        owner = np.repeat(np.arange(m), np.diff(ptr))
        flat = sp.csr_matrix((vals, (owner, rows * n + cols)), shape=(m, n * n))
        # K[(p,q),(r,s)] = X[q,r] * Sinv[s,p]
        kmat = np.einsum("qr,sp->pqrs", x, si).reshape(n * n, n * n)
        out += flat @ (flat @ kmat.T).T
    return 0.5 * (out + out.T)
