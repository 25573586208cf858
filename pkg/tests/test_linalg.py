import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from abcwave.errors import CapExceeded, SingularMatrix
from abcwave.linalg import dense_eigenvalues, kernel_basis, sparse_lu, subspace_distance


def test_identity_solve():
    x = sparse_lu(sp.identity(3)).solve(np.array([1.0, 2.0, 3.0]))
    np.testing.assert_allclose(x, [1, 2, 3])


def test_symmetric_two_by_two():
    x = sparse_lu(sp.csr_matrix([[2.0, 1.0], [1.0, 2.0]])).solve(np.array([3.0, 3.0]))
    np.testing.assert_allclose(x, [1, 1], rtol=1e-14)


def test_diagonally_dominant_recovers_solution(rng):
    A = rng.standard_normal((50, 50))
    A += np.diag(np.abs(A).sum(axis=1) + 1.0)
    x_true = rng.standard_normal(50)
    x = sparse_lu(sp.csr_matrix(A)).solve(A @ x_true)
    assert np.linalg.norm(x - x_true) / np.linalg.norm(x_true) <= 1e-10


def test_solve_matrix_rhs(rng):
    A = sp.diags([4.0, 5.0, 6.0]).tocsr()
    B = rng.standard_normal((3, 2))
    np.testing.assert_allclose(sparse_lu(A).solve(B), B / np.array([[4.0], [5.0], [6.0]]))


def test_singular_matrix_raises():
    with pytest.raises(SingularMatrix):
        sparse_lu(sp.csr_matrix([[1.0, 2.0], [2.0, 4.0]]))


def test_eigenvalues_diag_and_rotation():
    np.testing.assert_allclose(np.sort(dense_eigenvalues(np.diag([1.0, 2.0, 3.0]).real)), [1, 2, 3])
    w = dense_eigenvalues(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    np.testing.assert_allclose(np.sort_complex(w), [-1j, 1j], atol=1e-14)


def test_cube_roots_of_unity():
    companion = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    w = dense_eigenvalues(companion)
    roots = np.exp(2j * np.pi * np.arange(3) / 3)
    for r in roots:
        assert np.abs(w - r).min() <= 1e-10


def test_eigen_vectors_returned():
    A = np.array([[2.0, 1.0], [0.0, 3.0]])
    w, V = dense_eigenvalues(A, vectors=True)
    np.testing.assert_allclose(A @ V, V * w, atol=1e-13)


def test_eigen_cap():
    with pytest.raises(CapExceeded):
        dense_eigenvalues(np.eye(5), cap=4)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10_000), st.integers(min_value=2, max_value=12))
def test_eigenvalues_invariant_under_permutation(seed, n):
    r = np.random.default_rng(seed)
    A = r.standard_normal((n, n))
    perm = r.permutation(n)
    P = np.eye(n)[perm]
    w1 = np.sort_complex(dense_eigenvalues(A))
    w2 = np.sort_complex(dense_eigenvalues(P @ A @ P.T))
    scale = max(1.0, np.abs(w1).max())
    # match by nearest neighbour; sorting of conjugate pairs is not stable
    assert max(np.abs(w2 - z).min() for z in w1) <= 1e-9 * scale


def test_kernel_of_zero_and_diag():
    assert kernel_basis(np.zeros((2, 2))).dim == 2
    ker = kernel_basis(np.diag([1.0, 0.0]))
    assert ker.dim == 1
    assert subspace_distance(ker.basis, np.array([[0.0], [1.0]])) <= 1e-14


def test_kernel_flags_ambiguous_rank():
    ker = kernel_basis(np.diag([1.0, 2e-10]), tol=1e-10)
    assert ker.ambiguous_rank


def test_generator_kernel_is_constant_u(damped):
    ker = kernel_basis(damped.system.S)
    assert ker.dim == 1
    expected = damped.system.pack(U=1.0)[:, None]
    assert subspace_distance(ker.basis, expected) <= 1e-8


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_lu_residual_property(seed):
    r = np.random.default_rng(seed)
    n = int(r.integers(3, 30))
    A = sp.random(n, n, density=0.3, random_state=seed) + sp.identity(n) * (n + 1.0)
    b = r.standard_normal(n)
    x = sparse_lu(A.tocsr()).solve(b)
    assert np.linalg.norm(A @ x - b) <= 1e-12 * (np.linalg.norm(b) + 1)
