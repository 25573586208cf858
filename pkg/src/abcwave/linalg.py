"""Sparse and dense linear-algebra kernels.

Thin contracts over SciPy: a factor-once sparse LU (SuperLU with partial
pivoting), a dense nonsymmetric eigensolver (LAPACK ``geev``) and an
SVD-based numerical null space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import CapExceeded, NoConvergence, SingularMatrix

PIVOT_THRESHOLD = 1e-14
RANK_TOL = 1e-10
DENSE_CAP = 2000


def as_csr(A) -> sp.csr_matrix:
    """Return ``A`` as CSR with duplicate entries summed."""
    A = sp.csr_matrix(A, dtype=float)
    A.sum_duplicates()
    A.eliminate_zeros()
    return A


class Factorization:
    """LU decomposition of a square sparse matrix, reusable across solves."""

    def __init__(self, A):
        A = sp.csc_matrix(A, dtype=float)
        if A.shape[0] != A.shape[1]:
            raise ValueError(f"square matrix required, got shape {A.shape}")
        self.shape = A.shape
        scale = abs(A).max() if A.nnz else 0.0
        if scale == 0.0:
            raise SingularMatrix("zero matrix")
        try:
            self._lu = spla.splu(A, diag_pivot_thresh=1.0)
        except RuntimeError as exc:
            raise SingularMatrix(str(exc)) from exc
        pivots = np.abs(self._lu.U.diagonal())
        if pivots.min() <= PIVOT_THRESHOLD * scale:
            k = int(pivots.argmin())
            raise SingularMatrix(
                f"pivot {pivots[k]:.3e} at position {k} below {PIVOT_THRESHOLD:g}*max|A|"
            )

    def solve(self, b: np.ndarray) -> np.ndarray:
        """Solve ``A x = b`` for a vector or a matrix of right-hand sides."""
        b = np.asarray(b, dtype=float)
        if b.shape[0] != self.shape[0]:
            raise ValueError(f"rhs has {b.shape[0]} rows, matrix has {self.shape[0]}")
        return self._lu.solve(b)


def sparse_lu(A) -> Factorization:
    return Factorization(A)


def dense_eigenvalues(A, vectors: bool = False, cap: int = DENSE_CAP):
    """Eigenvalues (and optionally right eigenvectors) of a real square matrix.

    Returns the complex eigenvalue array, or ``(w, V)`` with eigenvectors in
    the columns of ``V`` when ``vectors`` is true.
    """
    A = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
    n = A.shape[0]
    if A.ndim != 2 or A.shape[1] != n:
        raise ValueError(f"square matrix required, got shape {A.shape}")
    if n > cap:
        raise CapExceeded(f"dense eigen path limited to {cap} unknowns, got {n}; coarsen the mesh")
    try:
        if vectors:
            w, V = scipy.linalg.eig(A, right=True, check_finite=True)
            return w, V
        return scipy.linalg.eigvals(A, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc


@dataclass(frozen=True)
class KernelResult:
    """Numerical null space of a matrix.

    ``basis`` holds an orthonormal basis in its columns.  ``ambiguous_rank``
    is set when some singular value sits within a decade of the threshold,
    i.e. the numerical rank is not clearly separated.
    """

    basis: np.ndarray
    singular_values: np.ndarray
    tol: float
    ambiguous_rank: bool

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def __len__(self) -> int:
        return self.dim

    def __iter__(self):
        return iter(self.basis.T)


def kernel_basis(A, tol: float = RANK_TOL) -> KernelResult:
    """Orthonormal basis of ``{x : A x ~ 0}`` at relative threshold ``tol``."""
    A = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"square matrix required, got shape {A.shape}")
    n = A.shape[0]
    _, s, Vh = scipy.linalg.svd(A)
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        return KernelResult(np.eye(n), s, tol, False)
    rel = s / smax
    null = rel <= tol
    ambiguous = bool(np.any((rel >= tol / 10) & (rel <= 10 * tol)))
    basis = Vh[null].conj().T
    return KernelResult(np.ascontiguousarray(basis), s, tol, ambiguous)


def subspace_distance(B1: np.ndarray, B2: np.ndarray) -> float:
    """Spectral-norm distance between the orthogonal projectors onto span(B1), span(B2)."""
    Q1 = scipy.linalg.orth(np.atleast_2d(B1.T).T) if B1.size else np.zeros((B2.shape[0], 0))
    Q2 = scipy.linalg.orth(np.atleast_2d(B2.T).T) if B2.size else np.zeros((B1.shape[0], 0))
    if Q1.shape[1] != Q2.shape[1]:
        return 1.0
    P = Q1 @ Q1.conj().T - Q2 @ Q2.conj().T
    return float(np.linalg.norm(P, 2))
