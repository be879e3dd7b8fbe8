import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import crandn, gauss_jordan_inverse, gram_loops, lu_logdet, random_hpd
from srzf.errors import NotPositiveDefinite
from srzf.linalg import chol_solve_columns, gram, logdet_hpd, nullspace_basis, pinv


def test_gram_identity():
    np.testing.assert_array_equal(gram(np.eye(2)), np.eye(2))


def test_gram_single_row():
    np.testing.assert_allclose(gram(np.array([[1, 1j]])), [[2]])


def test_gram_matches_loops_and_is_psd():
    rng = np.random.default_rng(1)
    H = crandn(rng, 4, 8)
    G = gram(H)
    np.testing.assert_allclose(G, gram_loops(H), rtol=1e-12, atol=1e-12)
    np.testing.assert_array_equal(G, G.conj().T)
    assert np.linalg.eigvalsh(G).min() >= -1e-10 * np.linalg.norm(H, 2) ** 2


def test_chol_solve_diagonal():
    np.testing.assert_allclose(chol_solve_columns(2 * np.eye(3), [1])[:, 0], [0, 0.5, 0])


def test_chol_solve_scaled_identity():
    np.testing.assert_allclose(chol_solve_columns(1.5 * np.eye(2), [0, 1]), np.eye(2) / 1.5)


def test_chol_solve_matches_gauss_jordan():
    rng = np.random.default_rng(2)
    A = random_hpd(rng, 6)
    X = chol_solve_columns(A, [0, 3])
    ref = gauss_jordan_inverse(A)[:, [0, 3]]
    np.testing.assert_allclose(X, ref, rtol=1e-9, atol=1e-12)
    E = np.eye(6)[:, [0, 3]]
    assert np.linalg.norm(A @ X - E) / np.linalg.norm(E) <= 1e-10


def test_chol_solve_rejects_singular():
    A = np.ones((2, 2), dtype=complex)
    with pytest.raises(NotPositiveDefinite):
        chol_solve_columns(A, [0])
    with pytest.raises(NotPositiveDefinite):
        chol_solve_columns(-np.eye(3), [0])


def test_chol_solve_bad_index():
    with pytest.raises(IndexError):
        chol_solve_columns(np.eye(2), [2])


def test_nullspace_single_row():
    B = nullspace_basis(np.array([[1.0, 0.0]]))
    assert B.shape == (2, 1)
    np.testing.assert_allclose(np.abs(B[:, 0]), [0, 1], atol=1e-15)


def test_nullspace_full_rank_is_empty():
    assert nullspace_basis(np.eye(2)).shape == (2, 0)


def test_nullspace_no_rows_is_whole_space():
    np.testing.assert_array_equal(nullspace_basis(np.zeros((0, 3))), np.eye(3))


def test_nullspace_random():
    rng = np.random.default_rng(3)
    A = crandn(rng, 3, 5)
    B = nullspace_basis(A)
    assert B.shape == (5, 2)
    np.testing.assert_allclose(B.conj().T @ B, np.eye(2), atol=1e-10)
    smax = np.linalg.norm(A, 2)
    assert np.linalg.norm(A @ B) <= 10 * 1e-12 * smax * np.sqrt(5)


def test_pinv_examples():
    np.testing.assert_allclose(pinv(2 * np.eye(2)), 0.5 * np.eye(2))
    np.testing.assert_allclose(pinv(np.array([[1.0], [0.0]])), [[1, 0]])
    np.testing.assert_array_equal(pinv(np.zeros((2, 3))), np.zeros((3, 2)))


def test_pinv_random_right_inverse_and_penrose():
    rng = np.random.default_rng(4)
    A = crandn(rng, 3, 6)
    X = pinv(A)
    np.testing.assert_allclose(A @ X, np.eye(3), atol=1e-9)
    tol = 1e-9 * np.linalg.norm(A)
    assert np.linalg.norm(A @ X @ A - A) <= tol
    assert np.linalg.norm(X @ A @ X - X) <= 1e-9 * np.linalg.norm(X)
    assert np.linalg.norm((A @ X).conj().T - A @ X) <= 1e-9
    assert np.linalg.norm((X @ A).conj().T - X @ A) <= 1e-9


def test_logdet_examples():
    assert logdet_hpd(np.eye(4)) == 0.0
    assert logdet_hpd(2 * np.eye(2)) == pytest.approx(2 * np.log(2), rel=1e-15)
    with pytest.raises(NotPositiveDefinite):
        logdet_hpd(np.diag([1.0, -1.0]))


def test_logdet_matches_lu():
    rng = np.random.default_rng(5)
    A = random_hpd(rng, 5)
    assert logdet_hpd(A) == pytest.approx(lu_logdet(A).real, rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 7), seed=st.integers(0, 2**32 - 1), data=st.data())
def test_chol_columns_equal_pinv_columns(n, seed, data):
    rng = np.random.default_rng(seed)
    A = random_hpd(rng, n, 0.1)
    cols = data.draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=n, unique=True))
    np.testing.assert_allclose(chol_solve_columns(A, cols), pinv(A)[:, cols],
                               rtol=1e-9, atol=1e-9 * np.linalg.norm(pinv(A)))


@settings(max_examples=40, deadline=None)
@given(r=st.integers(1, 6), extra=st.integers(0, 4), seed=st.integers(0, 2**32 - 1))
def test_nullspace_orthonormal_and_annihilating(r, extra, seed):
    rng = np.random.default_rng(seed)
    A = crandn(rng, r, r + extra)
    B = nullspace_basis(A)
    assert B.shape == (r + extra, extra)
    np.testing.assert_allclose(B.conj().T @ B, np.eye(extra), atol=1e-10)
    if extra:
        smax = np.linalg.norm(A, 2)
        assert np.max(np.linalg.norm(A @ B, axis=0)) <= 10 * 1e-12 * smax


@settings(max_examples=30, deadline=None)
@given(m=st.integers(1, 6), n=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_gram_psd(m, n, seed):
    H = crandn(np.random.default_rng(seed), m, n)
    G = gram(H)
    assert np.linalg.eigvalsh(G).min() >= -1e-10 * np.linalg.norm(H, 2) ** 2
