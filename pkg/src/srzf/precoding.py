"""Linear downlink precoders: SRZF and the ZF, RZF, WF, BD and SNS baselines.

Precoders are built from the channels known at the transmitter. Users are
stacked in a chosen order (see :func:`order_users`); all returned per-user
quantities are indexed by the ORIGINAL user index, with the stacking order
kept in ``PrecoderSet.permutation``.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import InsufficientNullSpace
from .linalg import chol_solve_columns, gram, logdet_hpd, nullspace_basis, pinv
from .power import fpa

__all__ = ["SCHEMES", "StackedCsi", "RegularizationPlan", "PrecoderSet",
           "default_alpha", "order_users", "srzf", "zf", "rzf", "wf", "bd",
           "sns_fixed", "precode", "make_plan", "weighted_blocks"]

SCHEMES = ("srzf", "zf", "rzf", "wf", "bd", "sns_fixed")


@dataclass
class StackedCsi:
    """Row-stack of the users' channel estimates in stacking order.

    ``permutation[i]`` is the original index of the user in stack slot ``i``.
    """

    Hbar: np.ndarray
    sizes: tuple
    permutation: np.ndarray

    @classmethod
    def from_blocks(cls, blocks, permutation=None):
        K = len(blocks)
        perm = np.arange(K) if permutation is None else np.asarray(permutation, dtype=int)
        if sorted(perm.tolist()) != list(range(K)):
            raise ValueError("permutation must reorder all users")
        Hbar = np.vstack([np.asarray(blocks[u], dtype=complex) for u in perm])
        sizes = tuple(int(blocks[u].shape[0]) for u in perm)
        return cls(Hbar=Hbar, sizes=sizes, permutation=perm)

    @property
    def K(self):
        return len(self.sizes)

    @property
    def M(self):
        return int(self.Hbar.shape[0])

    @property
    def N(self):
        return int(self.Hbar.shape[1])

    @property
    def offsets(self):
        """Zero-based first row of each stacked user."""
        return np.concatenate(([0], np.cumsum(self.sizes)[:-1])).astype(int)

    def rows(self, i):
        o = self.offsets[i]
        return slice(o, o + self.sizes[i])

    def block(self, i):
        return self.Hbar[self.rows(i)]


@dataclass
class RegularizationPlan:
    """Per-user regularization ``alphas[i] * diag(diags[i])`` in stack order."""

    alphas: np.ndarray
    diags: np.ndarray
    policy: str = "explicit"

    @classmethod
    def successive(cls, alphas, sizes):
        """Ones from the user's first row onward; nothing for the last user."""
        K, M = len(sizes), int(sum(sizes))
        diags = np.zeros((K, M))
        offsets = np.concatenate(([0], np.cumsum(sizes)[:-1]))
        for i in range(K - 1):
            diags[i, offsets[i]:] = 1.0
        return cls(np.broadcast_to(np.asarray(alphas, dtype=float), (K,)).copy(),
                   diags, "successive_J")

    @classmethod
    def identity(cls, alphas, sizes):
        K, M = len(sizes), int(sum(sizes))
        return cls(np.broadcast_to(np.asarray(alphas, dtype=float), (K,)).copy(),
                   np.ones((K, M)), "identity")

    @classmethod
    def diagonal(cls, alphas, diag, sizes):
        K = len(sizes)
        diag = np.asarray(diag, dtype=float)
        if diag.shape != (int(sum(sizes)),) or np.any(diag < 0):
            raise ValueError("diagonal weights must be nonnegative, one per stacked row")
        return cls(np.broadcast_to(np.asarray(alphas, dtype=float), (K,)).copy(),
                   np.tile(diag, (K, 1)), "explicit")

    def is_successive(self, sizes) -> bool:
        return np.array_equal(self.diags, RegularizationPlan.successive(self.alphas, sizes).diags)


@dataclass
class PrecoderSet:
    """Per-user precoders ``P[k]`` (N x M_k) indexed by original user.

    ``directions[k]`` holds the unnormalized columns and ``D[k]`` the power
    weights, so ``P[k] = directions[k] * sqrt(D[k])``. ``Phi[k]`` (SRZF and
    its relatives) is the M x M_k block of the regularized inverse, with
    rows in stacking order.
    """

    scheme: str
    P: list
    directions: list
    D: list
    permutation: np.ndarray
    Phi: Optional[list] = None
    plan: Optional[RegularizationPlan] = None
    extra: dict = field(default_factory=dict)

    def matrix(self) -> np.ndarray:
        """All precoders side by side (N x M), original user order."""
        return np.hstack(self.P)


def default_alpha(M, sigma2, P_T) -> float:
    """Regularization constant ``M sigma^2 / P_T``."""
    return float(M) * float(sigma2) / float(P_T)


def single_user_rates(Hbar_blocks, L, P_T, sigma2) -> np.ndarray:
    """Rate of each user served alone with equal power on its antennas."""
    rates = np.empty(len(Hbar_blocks))
    for k, Hk in enumerate(Hbar_blocks):
        Mk = Hk.shape[0]
        snr = P_T / (Mk * L[k] * sigma2)
        rates[k] = logdet_hpd(np.eye(Mk) + snr * gram(Hk)) / np.log(2)
    return rates


def order_users(Hbar_blocks, L, P_T, sigma2) -> np.ndarray:
    """Stacking order by descending single-user rate; ties keep index order."""
    r = single_user_rates(Hbar_blocks, L, P_T, sigma2)
    return np.argsort(-r, kind="stable")


def _finish(scheme, stacked, V, D=None, Phi=None, plan=None, P_T=None):
    """Split stacked columns per user, apply FPA, return in original order."""
    K = stacked.K
    blocks = [V[:, stacked.rows(i)] for i in range(K)]
    if D is None:
        D = fpa(blocks, P_T)
    P = [blocks[i] * np.sqrt(D[i]) for i in range(K)]
    inv = np.empty(K, dtype=int)
    inv[stacked.permutation] = np.arange(K)
    Phi_blocks = None if Phi is None else [Phi[:, stacked.rows(inv[k])] for k in range(K)]
    return PrecoderSet(
        scheme=scheme,
        P=[P[inv[k]] for k in range(K)],
        directions=[blocks[inv[k]] for k in range(K)],
        D=[np.asarray(D[inv[k]]) for k in range(K)],
        permutation=stacked.permutation.copy(),
        Phi=Phi_blocks,
        plan=plan,
    )


def _inverse(A):
    M = A.shape[0]
    return chol_solve_columns(A, np.arange(M))


def srzf(stacked: StackedCsi, plan: RegularizationPlan, P_T: float) -> PrecoderSet:
    """Successively-regularized zero-forcing precoder.

    Column block ``i`` of the direction matrix is
    ``Hbar^H (Hbar Hbar^H + alpha_i diag(d_i))^{-1}`` restricted to user
    ``i``'s columns; with the successive policy ``d_i`` covers user ``i``
    and everyone stacked after it, so user ``i`` causes no interference to
    users stacked before it. Powers follow FPA.
    """
    G = gram(stacked.Hbar)
    if plan.is_successive(stacked.sizes):
        Phi = kernels.srzf_columns(np.ascontiguousarray(G), stacked.sizes, plan.alphas)
    else:
        Phi = np.zeros_like(G)
        for i in range(stacked.K):
            cols = np.arange(*stacked.rows(i).indices(stacked.M))
            Phi[:, cols] = chol_solve_columns(G + plan.alphas[i] * np.diag(plan.diags[i]), cols)
    V = stacked.Hbar.conj().T @ Phi
    return _finish("srzf", stacked, V, Phi=Phi, plan=plan, P_T=P_T)


def zf(stacked: StackedCsi, P_T: float) -> PrecoderSet:
    """Zero forcing: columns of ``Hbar^+ = Hbar^H (Hbar Hbar^H)^{-1}``, FPA."""
    Phi = _inverse(gram(stacked.Hbar))
    return _finish("zf", stacked, stacked.Hbar.conj().T @ Phi, Phi=Phi, P_T=P_T)


def rzf(stacked: StackedCsi, alpha: float, P_T: float) -> PrecoderSet:
    """Regularized ZF: ``Hbar^H (Hbar Hbar^H + alpha I)^{-1}``, FPA."""
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    G = gram(stacked.Hbar)
    Phi = _inverse(G + alpha * np.eye(stacked.M))
    return _finish("rzf", stacked, stacked.Hbar.conj().T @ Phi, Phi=Phi, P_T=P_T)


def wf(stacked: StackedCsi, P_T: float, sigma2: float) -> PrecoderSet:
    """Transmit Wiener filter with one global power scale.

    ``beta * Hbar^H (Hbar Hbar^H + (M sigma^2 / P_T) I)^{-1}`` with ``beta``
    chosen so the total power is exactly ``P_T``.
    """
    M = stacked.M
    G = gram(stacked.Hbar)
    Phi = _inverse(G + default_alpha(M, sigma2, P_T) * np.eye(M))
    V = stacked.Hbar.conj().T @ Phi
    beta2 = P_T / np.sum(np.abs(V) ** 2)
    D = [np.full(s, beta2) for s in stacked.sizes]
    return _finish("wf", stacked, V, D=D, Phi=Phi)


def bd(stacked: StackedCsi, P_T: float) -> PrecoderSet:
    """Block diagonalization.

    Each user's directions live in the null space of every other user's
    channel and align with the dominant right singular vectors of the
    projected channel.
    """
    V = np.zeros((stacked.N, stacked.M), dtype=complex)
    bases = []
    for i in range(stacked.K):
        others = np.delete(stacked.Hbar, np.arange(*stacked.rows(i).indices(stacked.M)), axis=0)
        B = nullspace_basis(others)
        mk = stacked.sizes[i]
        if B.shape[1] < mk:
            raise InsufficientNullSpace(
                f"user slot {i}: null space has {B.shape[1]} < {mk} dimensions")
        _, _, Vh = np.linalg.svd(stacked.block(i) @ B)
        V[:, stacked.rows(i)] = B @ Vh[:mk].conj().T
        bases.append(B)
    out = _finish("bd", stacked, V, P_T=P_T)
    out.extra["bases"] = bases
    return out


def sns_fixed(stacked: StackedCsi, P_T: float) -> PrecoderSet:
    """Successive null-space precoding with a fixed zero-forcing combiner.

    User ``i``'s directions live in the null space of the users stacked
    before it and zero-force within that subspace: ``Psi_i (Hbar_i Psi_i)^+``.
    """
    V = np.zeros((stacked.N, stacked.M), dtype=complex)
    bases = []
    for i in range(stacked.K):
        F = stacked.Hbar[:stacked.offsets[i]]
        Psi = nullspace_basis(F) if i else np.eye(stacked.N, dtype=complex)
        mk = stacked.sizes[i]
        if Psi.shape[1] < mk:
            raise InsufficientNullSpace(
                f"user slot {i}: null space has {Psi.shape[1]} < {mk} dimensions")
        V[:, stacked.rows(i)] = Psi @ pinv(stacked.block(i) @ Psi)
        bases.append(Psi)
    out = _finish("sns_fixed", stacked, V, P_T=P_T)
    out.extra["bases"] = bases
    return out


def make_plan(alpha_policy, reg_matrix_policy, stacked: StackedCsi, P_T, sigma2):
    """Regularization plan in stacking order from scenario policies.

    An explicit alpha list is given per ORIGINAL user and is permuted here;
    an explicit diagonal is given per stacked row.
    """
    if isinstance(alpha_policy, str):
        alphas = np.full(stacked.K, default_alpha(stacked.M, sigma2, P_T))
    else:
        alphas = np.asarray(alpha_policy, dtype=float)[stacked.permutation]
    if isinstance(reg_matrix_policy, str):
        if reg_matrix_policy == "identity":
            return RegularizationPlan.identity(alphas, stacked.sizes)
        return RegularizationPlan.successive(alphas, stacked.sizes)
    return RegularizationPlan.diagonal(alphas, reg_matrix_policy, stacked.sizes)


def weighted_blocks(Hbar_blocks, L, weighting="path_loss"):
    """Channel blocks as the precoder sees them: ``H_k / sqrt(L_k)`` or raw."""
    if weighting == "none":
        return list(Hbar_blocks)
    if weighting != "path_loss":
        raise ValueError(f"unknown weighting {weighting!r}")
    return [np.asarray(h) / np.sqrt(l) for h, l in zip(Hbar_blocks, L)]


def precode(scheme: str, Hbar_blocks: Sequence[np.ndarray], L, P_T: float, sigma2: float,
            alpha_policy="paper_default", reg_matrix_policy="successive_J",
            order: bool = True, weighting: str = "path_loss") -> PrecoderSet:
    """Build one scheme's precoder from per-user channel estimates.

    Users are stacked by :func:`order_users` when ``order`` is set. With
    ``weighting="path_loss"`` the stacked rows are ``Hbar_k / sqrt(L_k)``,
    i.e. the physical channel, so the regularization ``M sigma^2 / P_T`` is
    on the same scale as the Gram matrix. ``rzf`` and ``wf`` always use
    ``M sigma^2 / P_T``.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {', '.join(SCHEMES)}")
    perm = order_users(Hbar_blocks, L, P_T, sigma2) if order else None
    stacked = StackedCsi.from_blocks(weighted_blocks(Hbar_blocks, L, weighting), perm)
    if scheme == "srzf":
        return srzf(stacked, make_plan(alpha_policy, reg_matrix_policy, stacked, P_T, sigma2), P_T)
    if scheme == "zf":
        return zf(stacked, P_T)
    if scheme == "rzf":
        return rzf(stacked, default_alpha(stacked.M, sigma2, P_T), P_T)
    if scheme == "wf":
        return wf(stacked, P_T, sigma2)
    if scheme == "bd":
        return bd(stacked, P_T)
    return sns_fixed(stacked, P_T)
