"""Dense complex linear algebra used by the precoders and rate evaluation.

All routines operate on ``complex128`` arrays and are pure functions. Column
indices are zero based.
"""

from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import NotPositiveDefinite

__all__ = ["hermitian", "gram", "chol_solve_columns", "nullspace_basis",
           "pinv", "logdet_hpd"]

#: Relative singular-value cutoff for null spaces and pseudo-inverses.
RANK_TOL = 1e-12


def hermitian(A: np.ndarray) -> np.ndarray:
    """Return the Hermitian part ``(A + A^H) / 2``."""
    A = np.asarray(A)
    return 0.5 * (A + A.conj().T)


def gram(H: np.ndarray) -> np.ndarray:
    """Gram matrix ``H H^H`` (M x M), symmetrized to absorb round-off."""
    H = np.asarray(H, dtype=complex)
    return hermitian(H @ H.conj().T)


def chol_solve_columns(A: np.ndarray, col_indices: Sequence[int]) -> np.ndarray:
    """Selected columns of ``A^{-1}`` for a Hermitian positive definite ``A``.

    One Cholesky factorization followed by one triangular solve pair per
    requested unit vector.

    Parameters
    ----------
    A : np.ndarray
        Hermitian positive definite matrix (M x M).
    col_indices : sequence of int
        Zero-based indices of the wanted columns of ``A^{-1}``.

    Returns
    -------
    np.ndarray
        M x len(col_indices) matrix.

    Raises
    ------
    NotPositiveDefinite
        If the factorization encounters a non-positive pivot.
    """
    A = hermitian(np.asarray(A, dtype=complex))
    M = A.shape[0]
    cols = np.asarray(col_indices, dtype=int)
    if cols.size and (cols.min() < 0 or cols.max() >= M):
        raise IndexError(f"column index out of range for {M}x{M} matrix")
    try:
        factor = scipy.linalg.cho_factor(A, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    # potrf does not flag a zero leading pivot on some builds
    if not np.all(np.real(np.diag(factor[0])) > 0):
        raise NotPositiveDefinite("non-positive pivot in Cholesky factor")
    E = np.zeros((M, cols.size), dtype=complex)
    E[cols, np.arange(cols.size)] = 1.0
    return scipy.linalg.cho_solve(factor, E, check_finite=False)


def nullspace_basis(A: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the numerical null space of ``A`` (r x N).

    Singular directions with ``sigma <= tol * sigma_max`` count as null. A
    matrix with no rows has the whole space as null space; a full column rank
    matrix yields an ``N x 0`` array.
    """
    A = np.asarray(A, dtype=complex)
    N = A.shape[1]
    if A.shape[0] == 0:
        return np.eye(N, dtype=complex)
    _, s, Vh = np.linalg.svd(A, full_matrices=True)
    if s.size == 0 or s[0] == 0.0:
        return np.eye(N, dtype=complex)
    rank = int(np.count_nonzero(s > tol * s[0]))
    return Vh[rank:].conj().T.copy()


def pinv(A: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Moore-Penrose pseudo-inverse via SVD with cutoff ``tol * sigma_max``."""
    A = np.asarray(A, dtype=complex)
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros(A.shape[::-1], dtype=complex)
    keep = s > tol * s[0]
    s_inv = np.zeros_like(s)
    s_inv[keep] = 1.0 / s[keep]
    return (Vh.conj().T * s_inv) @ U.conj().T


def logdet_hpd(A: np.ndarray) -> float:
    """Natural-log determinant of a Hermitian positive definite matrix."""
    A = hermitian(np.asarray(A, dtype=complex))
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    return float(2.0 * np.sum(np.log(np.real(np.diag(L)))))
