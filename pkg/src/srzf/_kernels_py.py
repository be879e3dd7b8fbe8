"""Pure-Python (numpy/LAPACK) versions of the compiled kernels."""

import numpy as np

from .linalg import chol_solve_columns, logdet_hpd


def srzf_columns(G, sizes, alphas):
    """Stacked direction matrix for successive regularization.

    Column block ``k`` holds the user-``k`` columns of
    ``(G + alphas[k] J_k)^{-1}``; ``J_k`` is ones on the diagonal from the
    user's first row onward and zero for the last user.
    """
    G = np.asarray(G, dtype=complex)
    M = G.shape[0]
    K = len(sizes)
    out = np.zeros((M, M), dtype=complex)
    m0 = 0
    for k, mk in enumerate(sizes):
        A = G.copy()
        if k < K - 1:
            idx = np.arange(m0, M)
            A[idx, idx] += alphas[k]
        cols = np.arange(m0, m0 + mk)
        out[:, cols] = chol_solve_columns(A, cols)
        m0 += mk
    return out


def block_rates(Y, sizes, sigma2):
    """Per-user rates in bits from the scaled cross-gain matrix ``Y``."""
    Y = np.asarray(Y, dtype=complex)
    rates = np.zeros(len(sizes))
    r0 = 0
    for k, mk in enumerate(sizes):
        rows = Y[r0:r0 + mk]
        own = rows[:, r0:r0 + mk]
        other = np.delete(rows, np.s_[r0:r0 + mk], axis=1)
        noise = sigma2 * np.eye(mk) + other @ other.conj().T
        rate = (logdet_hpd(noise + own @ own.conj().T) - logdet_hpd(noise)) / np.log(2)
        rates[k] = max(rate, 0.0)
        r0 += mk
    return rates
