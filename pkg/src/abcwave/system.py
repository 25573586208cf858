"""Discrete phase space and first-order generator.

States are flat arrays ordered ``(U, V, W, Z)``: bulk values of ``u``,
boundary values of ``v``, bulk values of ``u_t`` and boundary values of
``v_t``.  The semi-discrete dynamics is ``Mblk X' = -S X`` and the discrete
generator is ``A_h = Mblk^{-1} S``, so that ``X' + A_h X = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .assembly import Discretization
from .errors import DegenerateSplit, DimensionMismatch
from .linalg import Factorization, as_csr

SPLIT_THRESHOLD = 1e-14


class StateVector(NamedTuple):
    U: np.ndarray
    V: np.ndarray
    W: np.ndarray
    Z: np.ndarray


@dataclass(eq=False)
class BlockSystem:
    disc: Discretization
    Mblk: sp.csr_matrix
    S: sp.csr_matrix
    G: sp.csr_matrix  # pseudo-inner product (twice the energy form)
    D: sp.csr_matrix  # dissipation form
    _factor_cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_omega(self) -> int:
        return self.disc.n_omega

    @property
    def n_gamma(self) -> int:
        return self.disc.n_gamma

    @property
    def size(self) -> int:
        return 2 * (self.n_omega + self.n_gamma)

    @property
    def coeffs(self):
        return self.disc.coeffs

    @property
    def kappa_is_zero(self) -> bool:
        return self.disc.coeffs.kappa_is_zero

    def unpack(self, X: np.ndarray) -> StateVector:
        n, m = self.n_omega, self.n_gamma
        X = np.asarray(X)
        if X.shape[0] != self.size:
            raise DimensionMismatch(f"state has length {X.shape[0]}, system has {self.size}")
        return StateVector(X[:n], X[n:n + m], X[n + m:2 * n + m], X[2 * n + m:])

    def pack(self, U=0.0, V=0.0, W=0.0, Z=0.0) -> np.ndarray:
        n, m = self.n_omega, self.n_gamma
        return np.concatenate([np.broadcast_to(np.asarray(U, float), (n,)),
                               np.broadcast_to(np.asarray(V, float), (m,)),
                               np.broadcast_to(np.asarray(W, float), (n,)),
                               np.broadcast_to(np.asarray(Z, float), (m,))])

    @cached_property
    def mass_factor(self) -> Factorization:
        return Factorization(self.Mblk)

    def apply_generator(self, X: np.ndarray) -> np.ndarray:
        """``A_h X = Mblk^{-1} S X``."""
        return self.mass_factor.solve(self.S @ X)

    def stepping_operators(self, dt: float) -> tuple[sp.csr_matrix, sp.csr_matrix, Factorization]:
        """Cached ``(Mblk + dt/2 S, Mblk - dt/2 S, LU of the former)``."""
        key = float(dt)
        if key not in self._factor_cache:
            plus = as_csr(self.Mblk + 0.5 * key * self.S)
            minus = as_csr(self.Mblk - 0.5 * key * self.S)
            self._factor_cache[key] = (plus, minus, Factorization(plus))
        return self._factor_cache[key]

    @cached_property
    def H_gram(self) -> sp.csr_matrix:
        """Gram matrix of the (non-degenerate) phase-space inner product."""
        b, s = self.disc.bulk, self.disc.surf
        rho0, c = self.coeffs.rho0, self.coeffs.c
        return as_csr(sp.block_diag([b.K + b.M, (s.Ksigma + s.M) / rho0, b.M / c**2,
                                     s.Mmu / rho0]))

    def h_norm(self, X: np.ndarray) -> float:
        return float(np.sqrt(max(X @ (self.H_gram @ X), 0.0)))

    def mean_u(self, X: np.ndarray) -> float:
        U = self.unpack(X).U
        return float(self.disc.functionals.one_omega @ (self.disc.bulk.M @ U)) / self.disc.omega_measure

    def mean_v(self, X: np.ndarray) -> float:
        V = self.unpack(X).V
        return float(self.disc.functionals.one_gamma @ (self.disc.surf.M @ V)) / self.disc.gamma_measure

    def mean_w(self, X: np.ndarray) -> float:
        W = self.unpack(X).W
        return float(self.disc.functionals.one_omega @ (self.disc.bulk.M @ W)) / self.disc.omega_measure


def build_generator(disc: Discretization) -> BlockSystem:
    """Assemble ``Mblk`` and ``S`` from the bulk/boundary matrices.

    Rows of ``Mblk X' = -S X``::

        U' = W
        V' = Z
        M W'   = -Md W - c^2 K U + c^2 T^t MΓ Z
        MΓμ Z' = -(KΓσ + MΓκ) V - MΓδ Z - rho0 MΓ T W
    """
    b, s, T = disc.bulk, disc.surf, disc.trace.T
    co = disc.coeffs
    n, m = disc.n_omega, disc.n_gamma
    if b.M.shape != (n, n) or s.M.shape != (m, m) or T.shape != (m, n):
        raise DimensionMismatch("bulk, boundary and trace operators disagree in size")
    rho0, c2 = co.rho0, co.c**2
    In, Im = sp.identity(n, format="csr"), sp.identity(m, format="csr")
    Mblk = as_csr(sp.block_diag([In, Im, b.M, s.Mmu]))
    S = as_csr(sp.bmat([
        [None, None, -In, None],
        [None, None, None, -Im],
        [c2 * b.K, None, b.Md, -c2 * (T.T @ s.M)],
        [None, s.Ksigma + s.Mkappa, rho0 * (s.M @ T), s.Mdelta],
    ], format="csr"))
    G = as_csr(sp.block_diag([rho0 * b.K, s.Ksigma + s.Mkappa, (rho0 / c2) * b.M, s.Mmu]))
    D = as_csr(sp.block_diag([sp.csr_matrix((n, n)), sp.csr_matrix((m, m)),
                              (rho0 / c2) * b.Md, s.Mdelta]))
    return BlockSystem(disc=disc, Mblk=Mblk, S=S, G=G, D=D)


def pseudo_inner(X1: np.ndarray, X2: np.ndarray, system: BlockSystem) -> float:
    """``rho0 (∇u1,∇u2) + (σ∇v1,∇v2) + (κ v1,v2) + rho0/c^2 (w1,w2) + (μ z1,z2)``."""
    return float(X1 @ (system.G @ X2))


def energy(X: np.ndarray, system: BlockSystem) -> float:
    return 0.5 * pseudo_inner(X, X, system)


def dissipation_rate(X: np.ndarray, system: BlockSystem) -> float:
    """``rho0/c^2 (d w, w) + (δ z, z)``."""
    return float(X @ (system.D @ X))


def dissipation_check(X: np.ndarray, system: BlockSystem) -> tuple[float, float]:
    """Return ``([A_h X, X], rho0/c^2 (d w,w) + (δ z,z))``; the two agree identically."""
    lhs = pseudo_inner(system.apply_generator(X), X, system)
    return lhs, dissipation_rate(X, system)


@dataclass(frozen=True)
class NullSpace:
    dim: int
    basis: np.ndarray  # columns


def null_space_expected(system: BlockSystem) -> NullSpace:
    """Constant-u states, plus constant-v states when kappa vanishes identically."""
    cols = [system.pack(U=1.0)]
    if system.kappa_is_zero:
        cols.append(system.pack(V=1.0))
    return NullSpace(len(cols), np.column_stack(cols))


@dataclass(frozen=True)
class ProjectorSet:
    """Projection onto stationary states along the conserved-functional kernel.

    ``kappa_nonzero``: ``Pi_N X = (alpha X, 0, 0, 0)``.
    ``kappa_zero``: ``Pi_N X = (beta X, gamma X, 0, 0)``.
    """

    case: str
    system: BlockSystem = field(repr=False)
    alpha: np.ndarray | None = None
    beta: np.ndarray | None = None
    gamma: np.ndarray | None = None
    detC: float | None = None

    def constants(self, X: np.ndarray) -> tuple[float, ...]:
        if self.case == "kappa_nonzero":
            return (float(self.alpha @ X),)
        return float(self.beta @ X), float(self.gamma @ X)

    def pi_N(self, X: np.ndarray) -> np.ndarray:
        consts = self.constants(X)
        if self.case == "kappa_nonzero":
            return self.system.pack(U=consts[0])
        return self.system.pack(U=consts[0], V=consts[1])

    def pi_M(self, X: np.ndarray) -> np.ndarray:
        return X - self.pi_N(X)

    def matrix_N(self) -> np.ndarray:
        """Dense matrix of ``Pi_N`` (rank-one or rank-two)."""
        sysm = self.system
        if self.case == "kappa_nonzero":
            return np.outer(sysm.pack(U=1.0), self.alpha)
        return np.outer(sysm.pack(U=1.0), self.beta) + np.outer(sysm.pack(V=1.0), self.gamma)


def build_projectors(system: BlockSystem) -> ProjectorSet:
    disc = system.disc
    co = disc.coeffs
    if co.d_is_zero:
        raise DegenerateSplit("d vanishes identically; no stationary/decaying splitting")
    fun = disc.functionals
    n = system.n_omega
    int_d = float(fun.l1[:n].sum())  # 1^t Md 1
    area, perim = disc.omega_measure, disc.gamma_measure
    scale = area * max(1.0, float(np.abs(co.d).max()))
    if not int_d > SPLIT_THRESHOLD * scale:
        raise DegenerateSplit(f"integral of d is {int_d:.3e}")
    int_delta = float(disc.surf.Mdelta.sum())
    rho0, c2 = co.rho0, co.c**2
    det = int_d * int_delta + rho0 * c2 * perim**2
    if not co.kappa_is_zero:
        return ProjectorSet("kappa_nonzero", system, alpha=fun.l1 / int_d, detC=det)
    if not det > SPLIT_THRESHOLD * (scale * (int_delta + 1.0) + rho0 * c2 * perim**2):
        raise DegenerateSplit(f"determinant {det:.3e} not positive")
    beta = (int_delta * fun.l1 + c2 * perim * fun.l2) / det
    gamma = (int_d * fun.l2 - rho0 * perim * fun.l1) / det
    return ProjectorSet("kappa_zero", system, beta=beta, gamma=gamma, detC=det)
