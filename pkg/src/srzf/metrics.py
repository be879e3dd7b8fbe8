"""Achievable rates, inter-user interference and the IUI structure checks.

Rates treat all inter-user interference as Gaussian noise and are always
evaluated against the TRUE channels, whatever channels the precoder saw.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from . import kernels
from .channel import Scenario, apply_csi_error, dbm_to_linear, generate_channels
from .linalg import logdet_hpd
from .precoding import PrecoderSet, StackedCsi, make_plan, srzf, weighted_blocks

__all__ = ["RateReport", "Prop2Record", "effective_channel", "user_rate",
           "sum_rate", "prop1_residuals", "prop2_experiment", "prop2_summary"]

LN2 = np.log(2.0)


@dataclass
class RateReport:
    """Per-user rates (bits/channel use), their sum, IUI norms and power.

    ``iui_norms[k, j]`` is the Frobenius norm of the effective channel from
    user ``j``'s streams to user ``k``'s antennas (path loss included).
    """

    rates: np.ndarray
    sum_rate: float
    iui_norms: np.ndarray
    power_used: float


def effective_channel(H_k, L_k, P_j):
    """``H_k P_j / sqrt(L_k)``."""
    return np.asarray(H_k) @ np.asarray(P_j) / np.sqrt(L_k)


def user_rate(G_kk, interference_blocks, sigma2) -> float:
    """Rate of one user from its own and the interfering effective channels.

    Computed as ``log2 det(S) - log2 det(N)`` with ``N`` the noise plus
    interference covariance and ``S = N + G_kk G_kk^H``.
    """
    G_kk = np.atleast_2d(np.asarray(G_kk, dtype=complex))
    Mk = G_kk.shape[0]
    Nk = sigma2 * np.eye(Mk, dtype=complex)
    for G in interference_blocks:
        G = np.atleast_2d(G)
        Nk = Nk + G @ G.conj().T
    rate = (logdet_hpd(Nk + G_kk @ G_kk.conj().T) - logdet_hpd(Nk)) / LN2
    return max(rate, 0.0)


def sum_rate(H_blocks, L, P: PrecoderSet, sigma2) -> RateReport:
    """Evaluate a precoder set on the true channels ``H_blocks``."""
    sizes = [h.shape[0] for h in H_blocks]
    scale = np.repeat(1.0 / np.sqrt(np.asarray(L, dtype=float)), sizes)
    Y = (np.vstack(H_blocks) * scale[:, None]) @ P.matrix()
    rates = kernels.block_rates(np.ascontiguousarray(Y), sizes, float(sigma2))
    edges = np.concatenate(([0], np.cumsum(sizes)[:-1]))
    energy = np.add.reduceat(np.add.reduceat(np.abs(Y) ** 2, edges, axis=0), edges, axis=1)
    power = float(sum(np.sum(np.abs(p) ** 2) for p in P.P))
    return RateReport(rates=rates, sum_rate=float(np.sum(rates)),
                      iui_norms=np.sqrt(energy), power_used=power)


def prop1_residuals(H_blocks, plan, P_T, permutation=None):
    """Residuals of the perfect-CSI interference structure of SRZF.

    Builds SRZF from the true channels and compares, for every pair of
    stack slots ``(i, j)``, ``H_i P_j`` with
    ``(E_ij - alpha_j diag(d_j)[rows i] Omega_ij) D_j^{1/2}``, where ``E_ij``
    is the identity for ``i == j`` and zero otherwise and ``Omega_ij`` holds
    rows ``i`` of user ``j``'s inverse columns. For the successive policy
    this is zero for ``j > i`` and ``-alpha_j Omega_ij D_j^{1/2}`` for
    ``j < i``.

    Returns
    -------
    residuals : np.ndarray
        K x K table, stack order, each ``||H_i P_j - expected|| / ||P_j||``.
    precoder : PrecoderSet
    """
    stacked = StackedCsi.from_blocks(H_blocks, permutation)
    P = srzf(stacked, plan, P_T)
    K = stacked.K
    res = np.zeros((K, K))
    for j in range(K):
        uj = stacked.permutation[j]
        Pj, Phij, sqD = P.P[uj], P.Phi[uj], np.sqrt(P.D[uj])
        for i in range(K):
            rows = stacked.rows(i)
            E = np.eye(stacked.sizes[i]) if i == j else np.zeros((stacked.sizes[i], stacked.sizes[j]))
            expected = (E - plan.alphas[j] * plan.diags[j][rows, None] * Phij[rows]) * sqD
            res[i, j] = np.linalg.norm(stacked.block(i) @ Pj - expected) / np.linalg.norm(Pj)
    return res, P


@dataclass
class Prop2Record:
    """Extra interference at one user from its own CSI error, one trial.

    ``pair_gaps[j]`` is ``||H_k (P_j - Pk_j)||_F`` for the users ``j``
    stacked after ``k``, where ``Pk`` is the precoder built with user ``k``'s
    CSI made perfect; ``pair_bounds[j]`` is ``||Delta_k||_F ||P_j||_F``.
    """

    mu2: float
    trial: int
    pair_gaps: np.ndarray
    pair_bounds: np.ndarray

    @property
    def measured_gap(self) -> float:
        return float(np.sum(self.pair_gaps))

    @property
    def upper_bound(self) -> float:
        return float(np.sum(self.pair_bounds))

    def violations(self, rtol=1e-8) -> int:
        return int(np.count_nonzero(self.pair_gaps > self.pair_bounds * (1.0 + rtol)))


def prop2_experiment(s: Scenario, k: int, mu2_sweep: Sequence[float],
                     trials: Optional[int] = None, P_T_dbm: Optional[float] = None
                     ) -> List[Prop2Record]:
    """Monte-Carlo check of the imperfect-CSI interference bound.

    User ``k`` (zero based, stack position in the scenario's natural order)
    has its error variance swept over ``mu2_sweep``; the other users keep
    their scenario variances. The precoder and its user-``k``-perfect twin
    share the true channels and every other user's error draw.
    """
    if not 0 <= k < s.K:
        raise IndexError(f"user {k} out of range for K={s.K}")
    trials = s.n_trials if trials is None else int(trials)
    P_T = dbm_to_linear(s.P_T_dbm[0] if P_T_dbm is None else P_T_dbm)
    sigma2 = s.sigma2
    mask = np.zeros(s.K, dtype=bool)
    mask[k] = True
    records = []
    for t in range(trials):
        ch = generate_channels(s, t)
        for mu2 in mu2_sweep:
            mu2_k = np.array(s.mu2_k, dtype=float)
            mu2_k[k] = mu2
            csi = apply_csi_error(ch, mu2_k, None, s.seed, t)
            csi_k = apply_csi_error(ch, mu2_k, mask, s.seed, t)
            st = StackedCsi.from_blocks(weighted_blocks(csi.Hbar, ch.L, s.stack_weighting))
            st_k = StackedCsi.from_blocks(weighted_blocks(csi_k.Hbar, ch.L, s.stack_weighting))
            plan = make_plan(s.alpha_policy, s.reg_matrix_policy, st, P_T, sigma2)
            P = srzf(st, plan, P_T)
            Pk = srzf(st_k, plan, P_T)
            Hk = ch.H[k]
            err = np.linalg.norm(csi.Delta[k])
            later = range(k + 1, s.K)
            gaps = np.array([np.linalg.norm(Hk @ (P.P[j] - Pk.P[j])) for j in later])
            bounds = np.array([err * np.linalg.norm(P.P[j]) for j in later])
            records.append(Prop2Record(mu2=float(mu2), trial=t, pair_gaps=gaps,
                                       pair_bounds=bounds))
    return records


def prop2_summary(records: Sequence[Prop2Record]):
    """Per error variance: min/mean/max gap, mean bound, trials, violations."""
    out = []
    for mu2 in dict.fromkeys(r.mu2 for r in records):
        sel = [r for r in records if r.mu2 == mu2]
        gaps = np.array([r.measured_gap for r in sel])
        ubs = np.array([r.upper_bound for r in sel])
        out.append(dict(mu2=mu2, gap_min=float(gaps.min()), gap_mean=float(gaps.mean()),
                        gap_max=float(gaps.max()), ub_mean=float(ubs.mean()),
                        trials=len(sel), violations=sum(r.violations() for r in sel)))
    return out
