"""Scenario description, correlated channel generation and imperfect CSI.

Channels follow a finite-ray geometric model over uniform linear arrays with
half-wavelength spacing. Each user's departure angles sit in a narrow window
around its azimuth, so two users at nearly the same azimuth get strongly
correlated channels. Per-entry energy is normalized so that
``E[||H_k||_F^2] = N * M_k``.

Random draws come from counter-based substreams keyed by
``(seed, trial, user, purpose)``: changing the CSI error variance never
changes the true channels, and the CSI error of one user never changes the
error of another.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ConfigError, RankDeficiencyPersistent

__all__ = ["Scenario", "ChannelSet", "CsiSet", "dbm_to_linear", "path_loss",
           "ula_steering", "substream", "user_channel", "generate_channels",
           "apply_csi_error", "paired_geometry"]

PURPOSE_CHANNEL = 0
PURPOSE_CSI = 1
MAX_ATTEMPTS = 100
RANK_TOL = 1e-12

ALPHA_POLICIES = ("paper_default",)
REG_POLICIES = ("successive_J", "identity")
WEIGHTINGS = ("path_loss", "none")


def dbm_to_linear(p_dbm):
    """Power in dBm to milliwatts."""
    out = 10.0 ** (np.asarray(p_dbm, dtype=float) / 10.0)
    return float(out) if out.ndim == 0 else out


def path_loss(d):
    """Scalar path loss ``d**2`` for a distance in meters."""
    if np.any(np.asarray(d) <= 0):
        raise ValueError("distance must be positive")
    out = np.asarray(d, dtype=float) ** 2
    return float(out) if out.ndim == 0 else out


def paired_geometry(K: int, near: float = 50.0, far: float = 250.0,
                    offset: float = 0.5) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
    """Distances and azimuths for the paired near/far deployment.

    The first ``ceil(K/2)`` users sit on an equally spaced azimuth grid at
    distance ``near``; user ``ceil(K/2) + j`` sits ``offset`` degrees from
    user ``j`` at distance ``far``. The grid is shifted by a quarter step so
    no two grid users are mirror images for a linear array
    (``sin(t) == sin(180 - t)``).
    """
    n_near = (K + 1) // 2
    base = [(j + 0.25) * 360.0 / n_near for j in range(n_near)]
    az = base + [base[j] + offset for j in range(K - n_near)]
    dist = [near] * n_near + [far] * (K - n_near)
    return tuple(dist), tuple(az)


@dataclass(frozen=True)
class Scenario:
    """Full description of one experiment.

    Powers are in dBm, distances in meters and angles in degrees. Per-user
    sequences have length ``K``.
    """

    K: int
    N: int
    M_k: Tuple[int, ...]
    distances: Tuple[float, ...]
    azimuths: Tuple[float, ...]
    P_T_dbm: Tuple[float, ...] = (30.0,)
    sigma2_dbm: float = -35.0
    angular_spread: float = 0.5
    paired_offset: float = 0.5
    n_paths: int = 10
    diffuse_power: float = 1e-4
    mu2_k: Tuple[float, ...] = ()
    alpha_policy: Union[str, Tuple[float, ...]] = "paper_default"
    reg_matrix_policy: Union[str, Tuple[float, ...]] = "successive_J"
    stack_weighting: str = "path_loss"
    seed: int = 0
    n_trials: int = 200
    duplicate_users: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        K = self.K
        if K < 1 or self.N < 1:
            raise ConfigError("K", "K and N must be positive")
        for name in ("M_k", "distances", "azimuths"):
            if len(getattr(self, name)) != K:
                raise ConfigError(name, f"expected {K} values")
        if not self.mu2_k:
            object.__setattr__(self, "mu2_k", (0.0,) * K)
        if len(self.mu2_k) != K:
            raise ConfigError("mu2_k", f"expected {K} values")
        if any(m < 1 for m in self.M_k):
            raise ConfigError("M_k", "antenna counts must be positive")
        if self.N < sum(self.M_k):
            raise ConfigError("N", f"N={self.N} < total user antennas {sum(self.M_k)}")
        if any(d <= 0 for d in self.distances):
            raise ConfigError("distances", "distances must be positive")
        if any(m < 0 for m in self.mu2_k):
            raise ConfigError("mu2_k", "variances must be nonnegative")
        if not 0.0 <= self.diffuse_power <= 1.0:
            raise ConfigError("diffuse_power", "must lie in [0, 1]")
        if self.n_paths < 1:
            raise ConfigError("n_paths", "need at least one path")
        if self.n_trials < 1:
            raise ConfigError("n_trials", "need at least one trial")
        if not self.P_T_dbm:
            raise ConfigError("P_T_dbm", "empty power grid")
        if isinstance(self.alpha_policy, str):
            if self.alpha_policy not in ALPHA_POLICIES:
                raise ConfigError("alpha_policy", f"unknown policy {self.alpha_policy!r}")
        elif len(self.alpha_policy) != K or min(self.alpha_policy) < 0:
            raise ConfigError("alpha_policy", f"expected {K} nonnegative values")
        if isinstance(self.reg_matrix_policy, str):
            if self.reg_matrix_policy not in REG_POLICIES:
                raise ConfigError("reg_matrix_policy",
                                  f"unknown policy {self.reg_matrix_policy!r}")
        elif len(self.reg_matrix_policy) != self.M or min(self.reg_matrix_policy) < 0:
            raise ConfigError("reg_matrix_policy", f"expected {self.M} nonnegative weights")
        if self.stack_weighting not in WEIGHTINGS:
            raise ConfigError("stack_weighting", f"expected one of {', '.join(WEIGHTINGS)}")
        if self.duplicate_users is not None:
            i, j = self.duplicate_users
            if not (0 <= i < K and 0 <= j < K and i != j):
                raise ConfigError("duplicate_users", "need two distinct user indices")
            if self.M_k[i] != self.M_k[j]:
                raise ConfigError("duplicate_users", "users differ in antenna count")

    @classmethod
    def paired(cls, K, N, M_k=2, near=50.0, far=250.0, mu2=0.0, **kw):
        """Scenario with the paired near/far geometry."""
        offset = kw.get("paired_offset", 0.5)
        dist, az = paired_geometry(K, near, far, offset)
        M_k = (M_k,) * K if np.isscalar(M_k) else tuple(M_k)
        mu2 = (float(mu2),) * K if np.isscalar(mu2) else tuple(mu2)
        return cls(K=K, N=N, M_k=M_k, distances=dist, azimuths=az, mu2_k=mu2, **kw)

    @property
    def M(self) -> int:
        return int(sum(self.M_k))

    @property
    def path_losses(self) -> np.ndarray:
        return path_loss(np.asarray(self.distances, dtype=float))

    @property
    def sigma2(self) -> float:
        """Noise power in mW."""
        return dbm_to_linear(self.sigma2_dbm)


@dataclass
class ChannelSet:
    """True small-scale channels ``H[k]`` (M_k x N) and path losses ``L[k]``."""

    H: list
    L: np.ndarray

    @property
    def K(self):
        return len(self.H)


@dataclass
class CsiSet:
    """Channels known at the transmitter, ``Hbar[k] = H[k] + Delta[k]``."""

    Hbar: list
    Delta: list
    L: np.ndarray
    perfect_mask: np.ndarray = field(default=None)

    @classmethod
    def perfect(cls, ch: ChannelSet) -> "CsiSet":
        return cls(Hbar=[h.copy() for h in ch.H],
                   Delta=[np.zeros_like(h) for h in ch.H],
                   L=ch.L.copy(), perfect_mask=np.ones(ch.K, dtype=bool))


def ula_steering(n: int, angle_deg) -> np.ndarray:
    """Unit-norm half-wavelength ULA steering vector(s).

    A scalar angle gives shape ``(n,)``; an array of angles gives
    ``(n, len(angles))``.
    """
    phase = np.pi * np.sin(np.deg2rad(np.asarray(angle_deg, dtype=float)))
    idx = np.arange(n)
    return np.exp(-1j * np.multiply.outer(idx, phase)) / math.sqrt(n)


def substream(seed: int, trial: int, user: int, purpose: int,
              attempt: int = 0) -> np.random.Generator:
    """Independent generator for one (trial, user, purpose) cell."""
    return np.random.default_rng(
        np.random.SeedSequence([int(seed), int(trial), int(user), int(purpose), int(attempt)]))


def user_channel(N: int, M: int, azimuth: float, spread: float, n_paths: int,
                 rng: np.random.Generator, diffuse_power: float = 0.0,
                 gains=None) -> np.ndarray:
    """Draw one M x N channel.

    The specular part is
    ``sqrt(N M / n_paths) * sum_p g_p a_r(phi_p) a_t(theta_p)^H`` with
    standard circular Gaussian gains, departure angles uniform in
    ``azimuth +- spread/2`` and arrival angles uniform over the circle. A
    fraction ``diffuse_power`` of the energy is moved to an i.i.d. Rayleigh
    component, which keeps stacks of many users full rank.
    """
    if gains is None:
        gains = (rng.standard_normal(n_paths) + 1j * rng.standard_normal(n_paths)) / math.sqrt(2)
    theta = azimuth + spread * (rng.random(n_paths) - 0.5)
    phi = 360.0 * rng.random(n_paths)
    A_t = ula_steering(N, theta)
    A_r = ula_steering(M, phi)
    H = math.sqrt(N * M / n_paths) * (A_r * gains) @ A_t.conj().T
    if diffuse_power > 0.0:
        W = (rng.standard_normal((M, N)) + 1j * rng.standard_normal((M, N))) / math.sqrt(2)
        H = math.sqrt(1.0 - diffuse_power) * H + math.sqrt(diffuse_power) * W
    return H


def _full_row_rank(H: np.ndarray) -> bool:
    s = np.linalg.svd(H, compute_uv=False)
    return s[0] > 0 and s[-1] > RANK_TOL * s[0]


def generate_channels(s: Scenario, trial: int = 0) -> ChannelSet:
    """True channels of all users for one Monte-Carlo trial."""
    H = []
    for k in range(s.K):
        for attempt in range(MAX_ATTEMPTS):
            rng = substream(s.seed, trial, k, PURPOSE_CHANNEL, attempt)
            Hk = user_channel(s.N, s.M_k[k], s.azimuths[k], s.angular_spread,
                              s.n_paths, rng, s.diffuse_power)
            if _full_row_rank(Hk):
                break
        else:
            raise RankDeficiencyPersistent(
                f"user {k}: no full-row-rank draw in {MAX_ATTEMPTS} attempts "
                f"(n_paths={s.n_paths}, M_k={s.M_k[k]})")
        H.append(Hk)
    if s.duplicate_users is not None:
        i, j = s.duplicate_users
        H[j] = H[i].copy()
    return ChannelSet(H=H, L=s.path_losses)


def apply_csi_error(ch: ChannelSet, mu2_k: Sequence[float], perfect_mask=None,
                    seed: int = 0, trial: int = 0) -> CsiSet:
    """Add i.i.d. circular Gaussian errors of per-entry variance ``mu2_k[k]``.

    The unit-variance draw for each user depends only on
    ``(seed, trial, user)``, so sweeping a variance rescales the same error.
    Users flagged in ``perfect_mask`` get a zero error.
    """
    K = ch.K
    mu2_k = np.broadcast_to(np.asarray(mu2_k, dtype=float), (K,))
    if np.any(mu2_k < 0):
        raise ValueError("error variances must be nonnegative")
    mask = np.zeros(K, dtype=bool) if perfect_mask is None \
        else np.asarray(perfect_mask, dtype=bool)
    Hbar, Delta = [], []
    for k, Hk in enumerate(ch.H):
        if mask[k] or mu2_k[k] == 0.0:
            D = np.zeros_like(Hk)
        else:
            rng = substream(seed, trial, k, PURPOSE_CSI)
            Z = rng.standard_normal(Hk.shape) + 1j * rng.standard_normal(Hk.shape)
            D = math.sqrt(mu2_k[k] / 2.0) * Z
        Delta.append(D)
        Hbar.append(Hk + D)
    return CsiSet(Hbar=Hbar, Delta=Delta, L=ch.L.copy(), perfect_mask=mask)
