import math

import numpy as np
import pytest

from srzf.channel import (ChannelSet, CsiSet, Scenario, apply_csi_error, dbm_to_linear,
                          generate_channels, paired_geometry, path_loss, substream,
                          ula_steering, user_channel)
from srzf.errors import ConfigError, RankDeficiencyPersistent


def test_dbm_to_linear():
    assert dbm_to_linear(30) == pytest.approx(1000.0, rel=1e-15)
    assert dbm_to_linear(0) == 1.0
    assert dbm_to_linear(-35) == pytest.approx(10 ** -3.5, rel=1e-15)
    assert dbm_to_linear(-35) == pytest.approx(3.16228e-4, rel=1e-5)
    np.testing.assert_allclose(dbm_to_linear([0, 10]), [1, 10])


def test_path_loss():
    assert path_loss(50) == 2500
    assert path_loss(250) == 62500
    assert path_loss(1) == 1
    assert path_loss(49.9) < path_loss(50.0)
    with pytest.raises(ValueError):
        path_loss(0)


def test_steering_unit_norm_and_phase():
    a = ula_steering(8, 30.0)
    assert np.linalg.norm(a) == pytest.approx(1.0)
    np.testing.assert_allclose(np.abs(a), 1 / math.sqrt(8))
    # half-wavelength spacing: phase step pi sin(theta)
    np.testing.assert_allclose(a[1] / a[0], np.exp(-1j * np.pi * 0.5))
    assert ula_steering(4, [0, 10]).shape == (4, 2)


def test_single_path_closed_form():
    N = 16
    rng = np.random.default_rng(0)
    H = user_channel(N, 1, 0.0, 0.0, 1, rng, gains=np.array([1.0 + 0j]))
    # zero spread puts the departure angle at the azimuth exactly
    np.testing.assert_allclose(H[0], math.sqrt(N) * ula_steering(N, 0.0).conj())
    np.testing.assert_allclose(np.abs(H), 1.0)
    assert np.linalg.norm(H) ** 2 == pytest.approx(N)


@pytest.mark.parametrize("diffuse", [0.0, 1e-4])
def test_channel_energy(diffuse):
    N, M, n = 16, 2, 1000
    e = [np.linalg.norm(user_channel(N, M, 10.0, 0.5, 10, substream(1, t, 0, 0), diffuse)) ** 2
         for t in range(n)]
    assert abs(np.mean(e) / (N * M) - 1) <= 0.05


def test_paired_users_strongly_correlated():
    s = Scenario.paired(K=4, N=128, M_k=2, seed=11)
    cos = []
    for t in range(100):
        ch = generate_channels(s, t)
        for j in range(2):
            Qa = np.linalg.qr(ch.H[j].conj().T)[0]
            Qb = np.linalg.qr(ch.H[j + 2].conj().T)[0]
            cos.append(np.linalg.svd(Qa.conj().T @ Qb, compute_uv=False)[0])
    assert np.mean(cos) >= 0.9


def test_paired_geometry_layout():
    dist, az = paired_geometry(6, 50, 250, 0.5)
    assert dist == (50, 50, 50, 250, 250, 250)
    assert az[3:] == tuple(a + 0.5 for a in az[:3])
    np.testing.assert_allclose(np.diff(az[:3]), 120.0)
    dist, az = paired_geometry(5)
    assert len(dist) == len(az) == 5 and dist.count(50.0) == 3


def test_generation_is_reproducible_and_full_rank():
    s = Scenario.paired(K=4, N=8, seed=3)
    a, b = generate_channels(s, 2), generate_channels(s, 2)
    for x, y in zip(a.H, b.H):
        np.testing.assert_array_equal(x, y)
        assert np.linalg.matrix_rank(x) == 2
    c = generate_channels(s, 3)
    assert not np.allclose(a.H[0], c.H[0])
    np.testing.assert_array_equal(a.L, [2500, 2500, 62500, 62500])


def test_rank_failure_after_retries():
    s = Scenario.paired(K=2, N=8, M_k=3, n_paths=2, diffuse_power=0.0)
    with pytest.raises(RankDeficiencyPersistent):
        generate_channels(s)


def test_duplicate_users_copies_channel():
    s = Scenario.paired(K=4, N=8, duplicate_users=(0, 1))
    ch = generate_channels(s)
    np.testing.assert_array_equal(ch.H[0], ch.H[1])


def test_csi_error_zero_variance_is_exact():
    ch = generate_channels(Scenario.paired(K=2, N=4))
    csi = apply_csi_error(ch, [0.0, 0.0])
    for a, b in zip(csi.Hbar, ch.H):
        np.testing.assert_array_equal(a, b)


def test_csi_error_mask():
    ch = generate_channels(Scenario.paired(K=3, N=6))
    csi = apply_csi_error(ch, 1e-2, perfect_mask=[True, False, False])
    assert not np.any(csi.Delta[0])
    assert np.all(csi.Delta[1] != 0) and np.all(csi.Delta[2] != 0)
    for k in range(3):
        np.testing.assert_array_equal(csi.Hbar[k], ch.H[k] + csi.Delta[k])


def test_csi_error_variance():
    ch = ChannelSet(H=[np.zeros((100, 100), dtype=complex)], L=np.array([1.0]))
    D = apply_csi_error(ch, [1e-2], seed=5).Delta[0]
    assert abs(np.mean(np.abs(D) ** 2) / 1e-2 - 1) <= 0.05
    assert abs(np.var(D.real) / 5e-3 - 1) <= 0.05
    assert abs(np.mean(D)) < 5e-3


def test_csi_error_common_random_numbers():
    ch = generate_channels(Scenario.paired(K=2, N=4))
    a = apply_csi_error(ch, [1e-4, 1e-2], seed=1, trial=4)
    b = apply_csi_error(ch, [1e-2, 1e-2], seed=1, trial=4)
    np.testing.assert_allclose(b.Delta[0], 10 * a.Delta[0])
    np.testing.assert_array_equal(a.Delta[1], b.Delta[1])


def test_csi_error_rejects_negative():
    ch = generate_channels(Scenario.paired(K=2, N=4))
    with pytest.raises(ValueError):
        apply_csi_error(ch, [-1.0, 0.0])


def test_perfect_csiset():
    ch = generate_channels(Scenario.paired(K=2, N=4))
    csi = CsiSet.perfect(ch)
    assert csi.perfect_mask.all() and not any(d.any() for d in csi.Delta)


@pytest.mark.parametrize("kw,key", [
    (dict(N=3), "N"), (dict(distances=(50.0, -1.0)), "distances"),
    (dict(n_paths=0), "n_paths"), (dict(n_trials=0), "n_trials"),
    (dict(mu2_k=(-1.0, 0.0)), "mu2_k"), (dict(alpha_policy="bogus"), "alpha_policy"),
    (dict(reg_matrix_policy="bogus"), "reg_matrix_policy"),
    (dict(stack_weighting="bogus"), "stack_weighting"),
    (dict(diffuse_power=2.0), "diffuse_power"),
])
def test_scenario_validation(kw, key):
    base = dict(K=2, N=4, M_k=(2, 2), distances=(50.0, 250.0), azimuths=(0.0, 0.5),
                mu2_k=(0.0, 0.0))
    base.update(kw)
    with pytest.raises(ConfigError) as e:
        Scenario(**base)
    assert e.value.key == key
