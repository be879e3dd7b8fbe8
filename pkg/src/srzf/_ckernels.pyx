# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled hot loops: successive-regularization direction solve and
per-user rate evaluation. Mirrors :mod:`srzf._kernels_py` exactly."""

import numpy as np

from libc.math cimport log, sqrt
from scipy.linalg.cython_lapack cimport zpotrf, zpotrs

from srzf.errors import NotPositiveDefinite

ctypedef double complex cplx

cdef double LN2 = 0.6931471805599453


cdef inline double _abs2(cplx z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef Py_ssize_t _chol(cplx[:, ::1] A, Py_ssize_t n) noexcept nogil:
    # Left-looking lower Cholesky on the leading n x n block, in place.
    # Returns 0 on success, (pivot index + 1) on failure.
    cdef Py_ssize_t i, j, r
    cdef double d
    cdef cplx s
    for j in range(n):
        d = A[j, j].real
        for r in range(j):
            d -= _abs2(A[j, r])
        if not d > 0.0:
            return j + 1
        d = sqrt(d)
        A[j, j] = d
        for i in range(j + 1, n):
            s = A[i, j]
            for r in range(j):
                s = s - A[i, r] * A[j, r].conjugate()
            A[i, j] = s / d
    return 0


def srzf_columns(const cplx[:, ::1] G, sizes, alphas):
    """Stacked direction matrix for successive regularization.

    Column block ``k`` holds the user-``k`` columns of
    ``(G + alphas[k] J_k)^{-1}`` where ``J_k`` is ones on the diagonal from
    the user's first row onward (zero for the last user).

    One right-looking Cholesky sweep over ``G`` provides the leading factor
    shared by every user; each user then factors only its regularized Schur
    complement.
    """
    cdef Py_ssize_t M = G.shape[0]
    cdef Py_ssize_t K = len(sizes)
    cdef Py_ssize_t k, m0, mk, n, i, j, r, l, c, col
    cdef Py_ssize_t status = 0
    cdef double a, d
    cdef cplx s

    W_arr = np.array(G, dtype=np.complex128, order="C")
    T_arr = np.zeros((M, M), dtype=np.complex128)
    B_arr = np.zeros((M, M), dtype=np.complex128)
    out = np.zeros((M, M), dtype=np.complex128)
    cdef cplx[:, ::1] w = W_arr
    cdef cplx[:, ::1] t = T_arr
    cdef cplx[:, ::1] b = B_arr
    cdef cplx[:, ::1] phi = out
    cdef int nn, nrhs, ld = <int>M, info = 0
    cdef char up = b'U'

    # Row-major lower triangles are column-major upper ones, so LAPACK's 'U'
    # factor read back row-major is the lower factor L with A = L L^H. The
    # solve then acts on conj(A), hence the conjugates below.
    m0 = 0
    for k in range(K):
        mk = sizes[k]
        n = M - m0
        a = float(alphas[k]) if k < K - 1 else 0.0
        nn = <int>n
        nrhs = <int>mk
        with nogil:
            # regularized Schur complement of the leading m0 x m0 block
            for i in range(n):
                for j in range(i + 1):
                    t[i, j] = w[m0 + i, m0 + j]
                t[i, i] = t[i, i] + a
            zpotrf(&up, &nn, &t[0, 0], &ld, &info)
        if info:
            raise NotPositiveDefinite(
                f"non-positive pivot {m0 + info - 1} for user {k}")
        with nogil:
            # column-major n x mk identity block, leading dimension n
            for i in range(n * mk):
                (&b[0, 0])[i] = 0.0
            for l in range(mk):
                (&b[0, 0])[l * n + l] = 1.0
            zpotrs(&up, &nn, &nrhs, &t[0, 0], &ld, &b[0, 0], &nn, &info)
            for l in range(mk):
                col = m0 + l
                for i in range(n):
                    phi[m0 + i, col] = (&b[0, 0])[l * n + i].conjugate()
                # L11^H x1 = -L21^H x2
                for i in range(m0 - 1, -1, -1):
                    s = 0.0
                    for r in range(i + 1, M):
                        s = s - w[r, i].conjugate() * phi[r, col]
                    phi[i, col] = s / w[i, i].real
            # eliminate this user's columns from the unregularized Gram
            if k < K - 1:
                for c in range(m0, m0 + mk):
                    d = w[c, c].real
                    if not d > 0.0:
                        status = c + 1
                        break
                    d = sqrt(d)
                    w[c, c] = d
                    for r in range(c + 1, M):
                        w[r, c] = w[r, c] / d
                    for r in range(c + 1, M):
                        for j in range(c + 1, r + 1):
                            w[r, j] = w[r, j] - w[r, c] * w[j, c].conjugate()
        if status:
            raise NotPositiveDefinite(f"non-positive pivot {status - 1} in Gram")
        m0 += mk
    return out


cdef double _logdet_small(cplx[:, ::1] A, Py_ssize_t n, Py_ssize_t *status) noexcept nogil:
    cdef Py_ssize_t i
    cdef double acc = 0.0
    status[0] = _chol(A, n)
    if status[0]:
        return 0.0
    for i in range(n):
        acc += log(A[i, i].real)
    return 2.0 * acc


def block_rates(const cplx[:, ::1] Y, sizes, double sigma2):
    """Per-user rates in bits from the scaled cross-gain matrix ``Y``.

    ``Y`` is M x M with rows grouped by receiving user (already divided by
    the square root of the path loss) and columns grouped by the user whose
    stream they carry, in the same user order.
    """
    cdef Py_ssize_t M = Y.shape[0]
    cdef Py_ssize_t K = len(sizes)
    cdef Py_ssize_t k, r0, mk, i, j, c, status = 0
    cdef double ld_s, ld_n, rate
    cdef cplx own, other

    S_arr = np.zeros((M, M), dtype=np.complex128)
    N_arr = np.zeros((M, M), dtype=np.complex128)
    rates = np.zeros(K, dtype=np.float64)
    cdef cplx[:, ::1] S = S_arr
    cdef cplx[:, ::1] Nc = N_arr
    cdef double[::1] R = rates

    r0 = 0
    for k in range(K):
        mk = sizes[k]
        with nogil:
            for i in range(mk):
                for j in range(i + 1):
                    own = 0.0
                    other = 0.0
                    for c in range(M):
                        if r0 <= c < r0 + mk:
                            own = own + Y[r0 + i, c] * Y[r0 + j, c].conjugate()
                        else:
                            other = other + Y[r0 + i, c] * Y[r0 + j, c].conjugate()
                    if i == j:
                        other = other + sigma2
                    Nc[i, j] = other
                    S[i, j] = other + own
            ld_s = _logdet_small(S, mk, &status)
            if not status:
                ld_n = _logdet_small(Nc, mk, &status)
        if status:
            raise NotPositiveDefinite(f"interference covariance of user {k}")
        rate = (ld_s - ld_n) / LN2
        R[k] = rate if rate > 0.0 else 0.0
        r0 += mk
    return rates
