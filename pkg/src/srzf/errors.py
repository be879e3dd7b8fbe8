"""Exception types raised by the precoding library."""

import numpy as np


class NotPositiveDefinite(np.linalg.LinAlgError):
    """A Cholesky factorization hit a non-positive pivot.

    Usually means the stacked channel is rank deficient while the effective
    regularization is zero (or too small to matter).
    """


class InsufficientNullSpace(np.linalg.LinAlgError):
    """A null space has fewer dimensions than the streams it must carry."""


class ZeroDirection(ValueError):
    """A precoding direction has (numerically) zero norm."""


class RankDeficiencyPersistent(RuntimeError):
    """Channel generation kept producing row-rank deficient matrices."""


class ConfigError(ValueError):
    """Invalid or incomplete scenario configuration."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key
