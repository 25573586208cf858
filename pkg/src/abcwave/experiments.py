"""Experiment drivers shared by the command line and the acceptance suite."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .assembly import Discretization, assemble_all
from .coefficients import CoefficientSet, NodalCoefficients, evaluate
from .config import InitialDataSpec
from .elliptic import limit_constants_undamped, solve_vstar
from .geometry import BoundaryMesh1D, DomainSpec, Mesh2D, build_mesh
from .linalg import DENSE_CAP
from .spectral import analyze_spectrum, check_dissipativity, imaginary_axis_audit
from .system import (
    BlockSystem,
    build_generator,
    build_projectors,
    dissipation_check,
    energy,
    null_space_expected,
    pseudo_inner,
)
from .timeint import StepperConfig, default_dt, run, step


@dataclass
class Problem:
    domain: DomainSpec
    mesh: Mesh2D
    boundary: BoundaryMesh1D
    coeffs: NodalCoefficients
    disc: Discretization
    system: BlockSystem

    def default_dt(self) -> float:
        return default_dt(self.mesh.h_min(), self.coeffs.c)


def build_problem(domain: DomainSpec, coefficients: CoefficientSet, validate: bool = True) -> Problem:
    mesh, bm = build_mesh(domain)
    nodal = evaluate(coefficients, mesh, bm, validate=validate)
    disc = assemble_all(mesh, bm, nodal)
    return Problem(domain, mesh, bm, nodal, disc, build_generator(disc))


def initial_state(init: InitialDataSpec, problem: Problem) -> np.ndarray:
    sysm = problem.system
    if init.random:
        return random_state(sysm, np.random.default_rng(init.seed))
    mesh, bm = problem.mesh, problem.boundary
    bulk_ids = np.arange(mesh.n_nodes)
    return sysm.pack(
        U=init.u0.evaluate(mesh.nodes, bulk_ids),
        V=init.v0.evaluate(bm.nodes, bm.mesh_ids),
        W=init.u1.evaluate(mesh.nodes, bulk_ids),
        Z=init.v1.evaluate(bm.nodes, bm.mesh_ids),
    )


def random_state(system: BlockSystem, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal(system.size)


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool
    detail: str = ""
    op: str = "<="

    @classmethod
    def at_most(cls, name, value, tol, detail=""):
        value = float(value)
        return cls(name, value, float(tol), bool(value <= tol), detail)

    @classmethod
    def at_least(cls, name, value, bound, detail=""):
        value = float(value)
        return cls(name, value, float(bound), bool(value >= bound), detail, op=">=")

    @classmethod
    def equals(cls, name, value, expected, passed=None, detail=""):
        ok = value == expected if passed is None else passed
        return cls(name, float(value), float(expected), bool(ok), detail, op="==")

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return f"[{status}] {self.name}: {self.value:.3e} {self.op} {self.tolerance:.1e}{extra}"


# --- invariant suite -------------------------------------------------------


def _sym_defect(A) -> float:
    n = abs(A).max() if A.nnz else 1.0
    return float(abs(A - A.T).max() / n) if (A - A.T).nnz else 0.0


def structural_checks(problem: Problem) -> list[Check]:
    disc, sysm = problem.disc, problem.system
    b, s = disc.bulk, disc.surf
    checks = []
    asym = max(_sym_defect(A) for A in (b.M, b.K, b.Md, s.M, s.Mmu, s.Mdelta, s.Mkappa, s.Ksigma))
    checks.append(Check.at_most("matrices symmetric", asym, 1e-14))
    one_o, one_g = disc.functionals.one_omega, disc.functionals.one_gamma
    rowsum = max(np.abs(b.K @ one_o).max() / abs(b.K).max(),
                 np.abs(s.Ksigma @ one_g).max() / abs(s.Ksigma).max())
    checks.append(Check.at_most("constants in stiffness kernels", rowsum, 1e-12))
    ns = null_space_expected(sysm)
    ann = max(np.abs(sysm.S @ col).max() for col in ns.basis.T) / abs(sysm.S).max()
    checks.append(Check.at_most("S annihilates stationary states", ann, 1e-12))
    pn = max(abs(pseudo_inner(col, col, sysm)) for col in ns.basis.T)
    checks.append(Check.at_most("stationary states have zero pseudo-norm", pn, 1e-12))
    return checks


def dissipation_checks(problem: Problem, rng: np.random.Generator, n: int = 100) -> list[Check]:
    sysm = problem.system
    worst = 0.0
    worst_rhs = 0.0
    sym = 0.0
    for _ in range(n):
        X = random_state(sysm, rng)
        lhs, rhs = dissipation_check(X, sysm)
        worst = max(worst, abs(lhs - rhs) / (1.0 + abs(rhs)))
        worst_rhs = max(worst_rhs, abs(rhs))
        Y = random_state(sysm, rng)
        sym = max(sym, abs(pseudo_inner(X, Y, sysm) - pseudo_inner(Y, X, sysm))
                  / (1.0 + abs(pseudo_inner(X, Y, sysm))))
    checks = [Check.at_most("dissipation identity [A X, X] = D(X)", worst, 1e-10),
              Check.at_most("pseudo-inner product symmetric", sym, 1e-12)]
    co = problem.coeffs
    if co.d_is_zero and co.delta_is_zero:
        checks.append(Check.at_most("conservative: dissipation vanishes", worst_rhs, 0.0))
    return checks


def projector_checks(problem: Problem, rng: np.random.Generator, n: int = 100) -> list[Check]:
    sysm = problem.system
    P = build_projectors(sysm)
    fun = problem.disc.functionals
    idem = ortho = l1 = l2 = 0.0
    for _ in range(n):
        X = random_state(sysm, rng)
        nX = np.abs(X).max()
        PN = P.pi_N(X)
        PM = P.pi_M(X)
        idem = max(idem, np.abs(P.pi_N(PN) - PN).max() / nX)
        ortho = max(ortho, np.abs(P.pi_N(PM)).max() / nX)
        l1 = max(l1, abs(fun.L1(PM)) / (np.abs(fun.l1) @ np.abs(X)))
        l2 = max(l2, abs(fun.L2(PM)) / (np.abs(fun.l2) @ np.abs(X)))
    checks = [Check.at_most("Pi_N idempotent", idem, 1e-12),
              Check.at_most("Pi_N Pi_M = 0", ortho, 1e-12),
              Check.at_most("L1(Pi_M X) = 0", l1, 1e-12)]
    if P.case == "kappa_zero":
        checks.append(Check.at_most("L2(Pi_M X) = 0", l2, 1e-12))
    checks.append(Check("det C > 0", float(P.detC), 0.0, bool(P.detC > 0), op=">"))
    return checks


def run_checks(problem: Problem, X0: np.ndarray, dt: float, n_steps: int) -> list[Check]:
    sysm = problem.system
    cfg = StepperConfig(dt=dt, t_end=n_steps * dt)
    res = run(X0, sysm, cfg)
    E0 = energy(X0, sysm)
    L10 = problem.disc.functionals.L1(X0)
    L20 = problem.disc.functionals.L2(X0)
    checks = [
        Check.at_most("energy identity per step", res.max_identity_residual / (1 + E0), 1e-10),
        Check.at_most("L1 conserved", res.max_L1_drift / (1 + abs(L10)), 1e-10),
        Check.at_most("energy non-increasing", max(res.max_energy_increase, 0.0) / (1 + E0), 1e-10),
    ]
    if problem.coeffs.kappa_is_zero:
        checks.append(Check.at_most("L2 conserved", res.max_L2_drift / (1 + abs(L20)), 1e-10))
    co = problem.coeffs
    if co.d_is_zero and co.delta_is_zero:
        X = X0.copy()
        for _ in range(n_steps):
            X = step(X, sysm, dt)
        Xf = X.copy()
        dE = abs(energy(X, sysm) - E0) / (1 + E0)
        for _ in range(n_steps):
            X = step(X, sysm, -dt)
        back = np.linalg.norm(X - X0) / np.linalg.norm(X0)
        checks.append(Check.at_most("conservative: energy conserved", dE, 1e-10))
        checks.append(Check.at_most("forward/backward returns X0", back, 1e-8,
                                    f"|X(T)-X0|/|X0| = {np.linalg.norm(Xf - X0) / np.linalg.norm(X0):.2e}"))
    return checks


def spectral_checks(problem: Problem) -> list[Check]:
    sysm = problem.system
    if sysm.size > DENSE_CAP:
        return []
    rep = analyze_spectrum(sysm, vectors=True)
    expected = null_space_expected(sysm).dim
    checks = [
        Check.equals("kernel dimension", rep.kernel_dim, expected),
        Check.at_most("kernel span matches stationary states", rep.kernel_distance, 1e-8),
        Check.at_most("eigen residuals", rep.max_eigen_residual, 1e-8),
    ]
    fd = check_dissipativity(rep)
    checks.append(Check.at_least("nonzero spectrum in right half-plane", fd.min_real_part, fd.threshold,
                                       f"{fd.offending.size} offending"))
    co = problem.coeffs
    if co.d_positive:
        audit = imaginary_axis_audit(rep, co)
        checks.append(Check.equals("no nonzero imaginary eigenvalues", audit.near_axis.size, 0,
                                     bool(audit.passed), f"gap {audit.spectral_gap:.3e}"))
    return checks


def special_solution_checks(problem: Problem, dt: float, n_steps: int, u1: float = 1.0) -> list[Check]:
    """Exact trajectory ``(u1 t, u1 V*, u1, 0)`` of the d == 0, kappa != 0 system."""
    sysm = problem.system
    vstar = solve_vstar(problem.disc.surf, problem.coeffs.rho0)
    A = problem.disc.surf.Ksigma + problem.disc.surf.Mkappa
    rhs = -problem.coeffs.rho0 * problem.disc.surf.M.sum(axis=1).A1
    vres = np.abs(A @ vstar - rhs).max() / np.abs(rhs).max()
    t = n_steps * dt
    dX = sysm.pack(U=u1)
    gres = 0.0
    for s in np.linspace(0.0, t, 5):
        X_s = sysm.pack(U=u1 * s, V=u1 * vstar, W=u1)
        gres = max(gres, np.abs(sysm.Mblk @ dX + sysm.S @ X_s).max() / max(1.0, np.abs(X_s).max()))
    res = run(sysm.pack(V=u1 * vstar, W=u1), sysm, StepperConfig(dt=dt, t_end=t))
    track = max(abs(r.mean_u - u1 * r.t) / (1 + r.t) for r in res.reports)
    return [Check.at_most("v* residual", vres, 1e-10),
            Check.at_most("special solution generator residual", gres, 1e-12),
            Check.at_most("special solution tracked by stepper", track, 1e-9)]


def invariant_suite(problem: Problem, X0: np.ndarray, dt: float, seed: int = 0,
                    n_steps: int = 200) -> list[Check]:
    rng = np.random.default_rng(seed)
    co = problem.coeffs
    checks = structural_checks(problem)
    checks += dissipation_checks(problem, rng)
    if not co.d_is_zero:
        checks += projector_checks(problem, rng)
    if not np.any(X0):
        X0 = random_state(problem.system, rng)
    checks += run_checks(problem, X0, dt, n_steps)
    checks += spectral_checks(problem)
    if co.d_is_zero and not co.kappa_is_zero:
        checks += special_solution_checks(problem, dt, n_steps)
    return checks


# --- asymptotics -----------------------------------------------------------


LIMIT_STOP_RATIO = 1e-12


@dataclass
class AsymptoticsOutcome:
    case: str
    predicted: dict
    measured: dict
    error: float  # relative phase-space error, or max discrepancy of constants
    t_final: float
    steps: int
    reports: list = field(default_factory=list, repr=False)
    final: np.ndarray | None = field(default=None, repr=False)


def asymptotics(problem: Problem, X0: np.ndarray, dt: float, t_end: float,
                stop_energy_ratio: float | None = LIMIT_STOP_RATIO,
                record_every: int = 1) -> AsymptoticsOutcome:
    """Long run compared against the predicted stationary limit.

    With ``d != 0`` the limit is ``Pi_N X0`` and ``error`` is
    ``|X(t_end) - Pi_N X0|_H / |X0|_H``.  With ``d == 0`` the d == 0
    limit constants are compared with the measured ``mean(u_t)`` and ``v``.

    Stationary states carry no energy, so ``E(X) = E(Pi_M X)`` and the run
    stops once ``E(X) < stop_energy_ratio * E(X0)``.  Pass ``None`` to always
    integrate to ``t_end``.
    """
    sysm = problem.system
    cfg = StepperConfig(dt=dt, t_end=t_end, stop_energy_ratio=stop_energy_ratio,
                        record_every=record_every)
    res = run(X0, sysm, cfg)
    Xf = res.final
    if not problem.coeffs.d_is_zero:
        P = build_projectors(sysm)
        limit = P.pi_N(X0)
        err = sysm.h_norm(Xf - limit) / sysm.h_norm(X0)
        consts = P.constants(X0)
        if P.case == "kappa_nonzero":
            predicted = {"c1": consts[0]}
            measured = {"mean_u": sysm.mean_u(Xf)}
        else:
            predicted = {"c2": consts[0], "c3": consts[1]}
            measured = {"mean_u": sysm.mean_u(Xf), "mean_v": sysm.mean_v(Xf)}
        return AsymptoticsOutcome(P.case, predicted, measured, err, res.t_final, res.steps,
                                  res.reports, Xf)
    lim = limit_constants_undamped(X0, problem.disc)
    _, V, W, _ = sysm.unpack(Xf)
    MG = problem.disc.surf.M
    if lim.case == "kappa_nonzero":
        vs = lim.vstar
        predicted = {"ut_limit": lim.ut_limit}
        # coefficient of the best MΓ-fit of v by V*
        measured = {"mean_w": sysm.mean_w(Xf), "v_over_vstar": float(V @ (MG @ vs) / (vs @ (MG @ vs)))}
        err = max(abs(measured["mean_w"] - lim.ut_limit), abs(measured["v_over_vstar"] - lim.ut_limit))
        scale = max(1.0, abs(lim.ut_limit))
    else:
        predicted = {"v_limit": lim.v_limit, "ut_limit": 0.0}
        measured = {"mean_v": sysm.mean_v(Xf), "mean_w": sysm.mean_w(Xf)}
        err = max(abs(measured["mean_v"] - lim.v_limit), abs(measured["mean_w"]))
        scale = max(1.0, abs(lim.v_limit))
    field_err = max(np.abs(W - lim.ut_limit).max(),
                    np.abs(V - lim.v_profile(sysm.n_gamma)).max()) / scale
    out = AsymptoticsOutcome(lim.case, predicted, measured, float(err / scale), res.t_final,
                             res.steps, res.reports, Xf)
    out.measured["nodal_max_error"] = float(field_err)
    return out


# --- convergence -----------------------------------------------------------


def temporal_order(problem: Problem, X0: np.ndarray, dt: float, t_end: float) -> dict:
    """Three-level estimate ``log2(|X_dt - X_dt/2| / |X_dt/2 - X_dt/4|)``."""
    sysm = problem.system
    finals = []
    for k in range(3):
        h = dt / 2**k
        n = round(t_end / h)
        X = X0.copy()
        for _ in range(n):
            X = step(X, sysm, h)
        finals.append(X)
    e1 = sysm.h_norm(finals[0] - finals[1])
    e2 = sysm.h_norm(finals[1] - finals[2])
    return {"dt": dt, "t_end": t_end, "diff_dt_dt2": e1, "diff_dt2_dt4": e2,
            "order": math.log2(e1 / e2)}


def limit_constant_refinement(domain: DomainSpec, coefficients: CoefficientSet,
                              init: InitialDataSpec, levels: int = 3) -> list[dict]:
    """Predicted limit constants on successively refined meshes (both directions doubled)."""
    rows = []
    for k in range(levels):
        dom = DomainSpec(domain.kind, domain.outer_radius, domain.inner_radius,
                         domain.n_theta * 2**k, domain.n_r * 2**k)
        prob = build_problem(dom, coefficients)
        X0 = initial_state(init, prob)
        row = {"n_theta": dom.n_theta, "n_r": dom.n_r, "n_dof": prob.system.size,
               "omega_measure": prob.disc.omega_measure, "gamma_measure": prob.disc.gamma_measure}
        if not prob.coeffs.d_is_zero:
            P = build_projectors(prob.system)
            names = ("c1",) if P.case == "kappa_nonzero" else ("c2", "c3")
            row |= dict(zip(names, P.constants(X0)))
        else:
            lim = limit_constants_undamped(X0, prob.disc)
            row |= {"ut_limit": lim.ut_limit} if lim.case == "kappa_nonzero" else {"v_limit": lim.v_limit}
        rows.append(row)
    return rows


def sparse_nnz(problem: Problem) -> int:
    return int(sp.csr_matrix(problem.system.S).nnz)
