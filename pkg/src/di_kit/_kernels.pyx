# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels.

Two hot loops live here:

* ``eigh_hermitian``: dense Hermitian eigensolver (Householder reduction to
  real tridiagonal form followed by implicit-shift QL).
* ``schur_complement``: assembly of the interior-point Schur matrix
  ``M[i, j] = tr(A_i X A_j S^-1)`` from sparse constraint triplets.

``di_kit._pykernels`` implements the same functions in Python; results agree
to rounding.
"""
import numpy as np

from libc.math cimport sqrt, fabs, hypot

ctypedef double complex cplx


class KernelNoConvergence(RuntimeError):
    pass


cdef inline double _abs2(cplx z) nogil:
    return z.real * z.real + z.imag * z.imag


cdef inline double _sign(double a, double b) nogil:
    return fabs(a) if b >= 0.0 else -fabs(a)


def eigh_hermitian(a_in, int max_iter=60):
    """Eigenvalues (ascending) and unitary eigenvectors of a Hermitian matrix."""
    cdef cplx[:, ::1] a = np.array(a_in, dtype=np.complex128, order="C", copy=True)
    cdef Py_ssize_t n = a.shape[0]
    q_arr = np.eye(n, dtype=np.complex128)
    cdef cplx[:, ::1] q = q_arr
    cdef cplx[::1] v = np.zeros(n, dtype=np.complex128)
    cdef cplx[::1] p = np.zeros(n, dtype=np.complex128)
    cdef cplx[::1] w = np.zeros(n, dtype=np.complex128)
    cdef cplx[::1] qv = np.zeros(n, dtype=np.complex128)
    d_arr = np.zeros(n)
    e_arr = np.zeros(n)
    cdef double[::1] d = d_arr
    cdef double[::1] e = e_arr
    cdef Py_ssize_t i, j, k
    cdef double tail, xnorm, vnorm, kk, ax0
    cdef cplx x0, phase, alpha, acc

    if n == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=np.complex128)

    # Householder reduction: A <- H A H with H = I - 2 v v^H acting on k+1..n-1
    for k in range(n - 2):
        tail = 0.0
        for i in range(k + 2, n):
            tail += _abs2(a[i, k])
        if tail == 0.0:
            continue
        x0 = a[k + 1, k]
        ax0 = sqrt(_abs2(x0))
        xnorm = sqrt(tail + ax0 * ax0)
        if ax0 > 0.0:
            phase = x0 / ax0
        else:
            phase = 1.0
        alpha = -phase * xnorm
        for i in range(n):
            v[i] = 0.0
        for i in range(k + 1, n):
            v[i] = a[i, k]
        v[k + 1] = v[k + 1] - alpha
        vnorm = 0.0
        for i in range(k + 1, n):
            vnorm += _abs2(v[i])
        vnorm = sqrt(vnorm)
        for i in range(k + 1, n):
            v[i] = v[i] / vnorm
        # p = A v restricted to rows k..n-1
        for i in range(k, n):
            acc = 0.0
            for j in range(k + 1, n):
                acc = acc + a[i, j] * v[j]
            p[i] = acc
        kk = 0.0
        for i in range(k + 1, n):
            kk += (v[i].conjugate() * p[i]).real
        w[k] = p[k]
        for i in range(k + 1, n):
            w[i] = p[i] - kk * v[i]
        for i in range(k, n):
            for j in range(k, n):
                a[i, j] = a[i, j] - 2.0 * (v[i] * w[j].conjugate() + w[i] * v[j].conjugate())
        # Q <- Q H
        for i in range(n):
            acc = 0.0
            for j in range(k + 1, n):
                acc = acc + q[i, j] * v[j]
            qv[i] = acc
        for i in range(n):
            for j in range(k + 1, n):
                q[i, j] = q[i, j] - 2.0 * qv[i] * v[j].conjugate()

    # diagonal phases make the off-diagonal real and non-negative
    phases_arr = np.ones(n, dtype=np.complex128)
    cdef cplx[::1] ph = phases_arr
    cdef double at
    for k in range(n):
        d[k] = a[k, k].real
    for k in range(n - 1):
        at = sqrt(_abs2(a[k + 1, k]))
        e[k] = at
        if at > 0.0:
            ph[k + 1] = ph[k] * (a[k + 1, k] / at)
        else:
            ph[k + 1] = ph[k]
    e[n - 1] = 0.0

    z_arr = np.eye(n)
    cdef double[:, ::1] z = z_arr
    _tql(d, e, z, n, max_iter)

    order = np.argsort(d_arr, kind="stable")
    vecs = (q_arr * phases_arr[None, :]) @ z_arr
    return d_arr[order], vecs[:, order]


cdef int _tql(double[::1] d, double[::1] e, double[:, ::1] z, Py_ssize_t n, int max_iter) except -1:
    cdef Py_ssize_t l, m, i, kx
    cdef int it
    cdef double g, r, s, c, p, f, b, dd
    cdef double eps = 2.220446049250313e-16
    cdef bint underflow
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = fabs(d[m]) + fabs(d[m + 1])
                if fabs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            if it == max_iter:
                raise KernelNoConvergence("QL iteration did not converge")
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + _sign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = False
            i = m - 1
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = hypot(f, g)
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
                for kx in range(n):
                    f = z[kx, i + 1]
                    z[kx, i + 1] = s * z[kx, i] + c * f
                    z[kx, i] = c * z[kx, i] - s * f
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return 0


def schur_complement(list blocks, list xs, list sinvs, Py_ssize_t m):
    """Schur matrix of the HKM direction.

    ``blocks[b]`` is a tuple ``(ptr, rows, cols, vals)`` listing, for each
    constraint ``k``, the entries ``ptr[k]:ptr[k+1]`` of the symmetric matrix
    ``A_k`` restricted to block ``b`` (both triangles listed).
    """
    out = np.zeros((m, m))
    cdef double[:, ::1] M = out
    cdef long[::1] ptr
    cdef long[::1] rows
    cdef long[::1] cols
    cdef double[::1] vals
    cdef double[:, ::1] X
    cdef double[:, ::1] Si
    cdef Py_ssize_t bi, ki, kj, u, t, p_, q_, r_, s_
    cdef double acc, av
    for bi in range(len(blocks)):
        ptr, rows, cols, vals = blocks[bi]
        X = xs[bi]
        Si = sinvs[bi]
        for ki in range(m):
            if ptr[ki] == ptr[ki + 1]:
                continue
            for kj in range(ki, m):
                if ptr[kj] == ptr[kj + 1]:
                    continue
                acc = 0.0
                for u in range(ptr[ki], ptr[ki + 1]):
                    p_ = rows[u]
                    q_ = cols[u]
                    av = vals[u]
                    for t in range(ptr[kj], ptr[kj + 1]):
                        r_ = rows[t]
                        s_ = cols[t]
                        acc += av * vals[t] * X[q_, r_] * Si[s_, p_]
                M[ki, kj] += acc
    for ki in range(m):
        for kj in range(ki):
            M[ki, kj] = M[kj, ki]
    return out
