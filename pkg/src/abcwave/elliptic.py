"""Auxiliary boundary problem and the d == 0 limit constants."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assembly import Discretization, SurfaceMatrices
from .errors import SingularSystem
from .linalg import Factorization


def solve_vstar(surf: SurfaceMatrices, rho0: float) -> np.ndarray:
    """Solve ``(KΓσ + MΓκ) V* = -rho0 MΓ 1`` on the acoustic boundary.

    Discretizes ``-div_Γ(σ ∇_Γ v*) + κ v* + rho0 = 0``, which has no solution
    on a closed curve when κ vanishes identically.
    """
    if surf.kappa_is_zero:
        raise SingularSystem("kappa == 0: the boundary equation for v* is not solvable")
    A = surf.Ksigma + surf.Mkappa
    rhs = -rho0 * (surf.M @ np.ones(surf.M.shape[0]))
    lu = Factorization(A)
    V = lu.solve(rhs)
    # one refinement sweep keeps the residual at roundoff for stiff σ/κ ratios
    return V + lu.solve(rhs - A @ V)


@dataclass(frozen=True)
class UndampedLimits:
    """Predicted t -> inf limits for d == 0 with boundary damping.

    ``kappa_nonzero``: ``u_t -> ut_limit`` (a constant), ``v -> ut_limit * V*``.
    ``kappa_zero``: ``u_t -> 0``, ``v -> v_limit`` (a constant).
    """

    case: str
    ut_limit: float
    v_limit: float | None = None
    vstar: np.ndarray | None = None

    def v_profile(self, n_gamma: int) -> np.ndarray:
        if self.case == "kappa_nonzero":
            return self.ut_limit * self.vstar
        return np.full(n_gamma, self.v_limit)


def limit_constants_undamped(X0: np.ndarray, disc: Discretization,
                             vstar: np.ndarray | None = None) -> UndampedLimits:
    """Limit constants from the conserved functional with discrete measures.

    ``X0`` is a flat state ``(U, V, W, Z)``; only ``V = v0`` and ``W = u1``
    enter.
    """
    n, m = disc.n_omega, disc.n_gamma
    v0 = X0[n:n + m]
    u1 = X0[n + m:2 * n + m]
    c2 = disc.coeffs.c**2
    int_u1 = float(disc.functionals.one_omega @ (disc.bulk.M @ u1))
    int_v0 = float(disc.functionals.one_gamma @ (disc.surf.M @ v0))
    if disc.coeffs.kappa_is_zero:
        return UndampedLimits("kappa_zero", 0.0, (c2 * int_v0 - int_u1) / (c2 * disc.gamma_measure))
    if vstar is None:
        vstar = solve_vstar(disc.surf, disc.coeffs.rho0)
    int_vstar = float(disc.functionals.one_gamma @ (disc.surf.M @ vstar))
    a = (int_u1 - c2 * int_v0) / (disc.omega_measure - c2 * int_vstar)
    return UndampedLimits("kappa_nonzero", a, None, vstar)
