"""Fixed power allocation and transmit-power accounting."""

import numpy as np

from .errors import ZeroDirection

__all__ = ["fpa", "total_power"]

ZERO_NORM = 1e-300


def fpa(directions, P_T):
    """Fixed power allocation over unnormalized precoding directions.

    Every column ``v`` of every user block gets the weight
    ``P_T / (M * ||v||^2)``, so each scaled column carries ``P_T / M`` and the
    total is exactly ``P_T``. ``M`` is the total number of columns.

    Parameters
    ----------
    directions : list of np.ndarray
        Per-user N x M_k direction matrices.
    P_T : float
        Transmit power (mW).

    Returns
    -------
    list of np.ndarray
        Per-user diagonal weights, one length-M_k array each.
    """
    M = sum(V.shape[1] for V in directions)
    D = []
    for k, V in enumerate(directions):
        norms2 = np.sum(np.abs(V) ** 2, axis=0)
        if np.any(norms2 <= ZERO_NORM):
            raise ZeroDirection(f"user {k} has a zero-norm precoding direction")
        D.append(P_T / (M * norms2))
    return D


def total_power(P) -> float:
    """Sum of squared Frobenius norms of the per-user precoders."""
    blocks = P.P if hasattr(P, "P") else P
    return float(sum(np.sum(np.abs(Pk) ** 2) for Pk in blocks))
