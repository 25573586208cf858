"""Acceptance criteria, runnable from pytest and from ``abcwave verify``.

Each criterion builds its own configurations, evaluates every check at a
fixed tolerance and returns a :class:`CriterionResult`.
"""

from __future__ import annotations

import time
from collections.abc import Callable
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .coefficients import CoefficientSet
from .coefficients import Profile as P
from .elliptic import solve_vstar
from .experiments import (
    Check,
    Problem,
    asymptotics,
    build_problem,
    random_state,
    special_solution_checks,
    temporal_order,
)
from .geometry import DomainSpec
from .linalg import kernel_basis, subspace_distance
from .spectral import analyze_spectrum, check_dissipativity, imaginary_axis_audit
from .system import build_projectors, dissipation_check, energy, null_space_expected
from .timeint import StepperConfig, run, step

SEED = 20240601


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list[Check] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number:2d}: {self.title} ({self.seconds:.1f}s)"

    def first_failure(self) -> Check | None:
        return next((c for c in self.checks if not c.passed), None)


def _mixed(kappa: P) -> CoefficientSet:
    return CoefficientSet(mu=P.constant(1.0), sigma=P.angular(1.0, 0.3, 2), delta=P.angular(1.0, 0.5, 3),
                          kappa=kappa, d=P.radial(0.0, 1.0), rho0=1.0, c=1.0)


FINE_DISK = DomainSpec("disk", 1.0, 0.0, 64, 16)
COARSE_DISK = DomainSpec("disk", 1.0, 0.0, 16, 4)


@lru_cache(maxsize=None)
def _mixed_run(kappa_zero: bool):
    prob = build_problem(FINE_DISK, _mixed(P.constant(0.0) if kappa_zero else P.constant(1.0)))
    X0 = random_state(prob.system, np.random.default_rng(SEED))
    t0 = time.perf_counter()
    res = run(X0, prob.system, StepperConfig(dt=prob.default_dt(), t_end=2000 * prob.default_dt()))
    return prob, X0, res, time.perf_counter() - t0


def criterion_energy_identity() -> list[Check]:
    prob, X0, res, secs = _mixed_run(False)
    E0 = energy(X0, prob.system)
    return [
        Check.equals("steps taken", res.steps, 2000),
        Check.at_most("max per-step identity residual / (1+E0)", res.max_identity_residual / (1 + E0), 1e-10),
        Check.at_most("runtime [s]", secs, 30.0),
    ]


def criterion_l1_invariance() -> list[Check]:
    checks = []
    for kappa_zero in (False, True):
        prob, X0, res, _ = _mixed_run(kappa_zero)
        fun = prob.disc.functionals
        tag = "kappa=0" if kappa_zero else "kappa!=0"
        checks.append(Check.at_most(f"{tag}: max |L1(X^n)-L1(X0)| / (1+|L1(X0)|)",
                                    res.max_L1_drift / (1 + abs(fun.L1(X0))), 1e-10))
        if kappa_zero:
            checks.append(Check.at_most(f"{tag}: max |L2(X^n)-L2(X0)| / (1+|L2(X0)|)",
                                        res.max_L2_drift / (1 + abs(fun.L2(X0))), 1e-10))
    return checks


def criterion_conservative() -> list[Check]:
    checks = []
    for kappa in (P.angular(1.0, 0.5, 2), P.constant(0.0)):
        prob = build_problem(DomainSpec("disk", 1.0, 0.0, 32, 8),
                             CoefficientSet(sigma=P.angular(1.0, 0.3, 1), kappa=kappa))
        sysm = prob.system
        X0 = random_state(sysm, np.random.default_rng(SEED + 1))
        dt = prob.default_dt()
        n = 5000
        res = run(X0, sysm, StepperConfig(dt=dt, t_end=n * dt), keep_energies=True)
        E0 = energy(X0, sysm)
        tag = "kappa=0" if prob.coeffs.kappa_is_zero else "kappa!=0"
        checks.append(Check.at_most(f"{tag}: max |E(X^n)-E(X0)| / (1+E0) over {n} steps",
                                    np.abs(res.energies - E0).max() / (1 + E0), 1e-10))
        X = res.final
        for _ in range(n):
            X = step(X, sysm, -dt)
        checks.append(Check.at_most(f"{tag}: forward/backward |X - X0| / |X0|",
                                    np.linalg.norm(X - X0) / np.linalg.norm(X0), 1e-8))
    return checks


KERNEL_CASES = [
    (DomainSpec("disk", 1.0, 0.0, 16, 4), dict(d=P.constant(1.0))),
    (DomainSpec("annulus", 1.0, 0.5, 16, 3), dict(d=P.radial(0.0, 1.0), delta=P.constant(1.0))),
    (DomainSpec("disk", 2.0, 0.0, 12, 3), dict(sigma=P.angular(2.0, 1.0, 3), mu=P.radial(1.0, 0.5))),
    (DomainSpec("annulus", 1.5, 0.3, 20, 4), dict(delta=P.angular(0.5, 0.5, 1), rho0=2.0, c=1.5)),
]


def criterion_kernel() -> list[Check]:
    checks = []
    for kappa in (P.angular(1.0, 0.5, 2), P.constant(0.0)):
        for dom, kw in KERNEL_CASES:
            prob = build_problem(dom, CoefficientSet(kappa=kappa, **kw))
            ker = kernel_basis(prob.system.S)
            exp = null_space_expected(prob.system)
            tag = f"{dom.kind} {dom.n_theta}x{dom.n_r} kappa={'0' if prob.coeffs.kappa_is_zero else '!0'}"
            checks.append(Check.equals(f"{tag}: kernel dim", ker.dim, exp.dim,
                                       ker.dim == exp.dim and not ker.ambiguous_rank))
            dist = subspace_distance(ker.basis, exp.basis) if ker.dim == exp.dim else 1.0
            checks.append(Check.at_most(f"{tag}: span distance", dist, 1e-8))
    return checks


def criterion_dissipation() -> list[Check]:
    checks = []
    configs = {
        "mixed": _mixed(P.constant(1.0)),
        "mixed kappa=0": _mixed(P.constant(0.0)),
        "conservative": CoefficientSet(kappa=P.constant(1.0)),
    }
    for name, co in configs.items():
        prob = build_problem(COARSE_DISK, co)
        rng = np.random.default_rng(SEED + 2)
        worst = max_rhs = 0.0
        for _ in range(100):
            lhs, rhs = dissipation_check(random_state(prob.system, rng), prob.system)
            worst = max(worst, abs(lhs - rhs) / (1 + abs(rhs)))
            max_rhs = max(max_rhs, abs(rhs))
        checks.append(Check.at_most(f"{name}: max |[A_h X,X] - rhs| / (1+rhs)", worst, 1e-10))
        if name == "conservative":
            checks.append(Check.equals("conservative: rhs exactly 0", max_rhs, 0.0))
    return checks


SPECTRAL_CONFIGS = [
    (COARSE_DISK, dict(d=P.constant(1.0), kappa=P.constant(1.0))),
    (COARSE_DISK, dict(d=P.constant(1.0))),
    (COARSE_DISK, dict(d=P.radial(0.0, 1.0), kappa=P.angular(1.0, 0.5, 2), delta=P.constant(0.5))),
    (COARSE_DISK, dict(delta=P.constant(1.0), kappa=P.constant(2.0))),
    (COARSE_DISK, dict(kappa=P.constant(1.0))),
    (COARSE_DISK, dict()),
    (DomainSpec("annulus", 1.0, 0.5, 24, 4), dict(d=P.angular(1.0, 0.9, 2), sigma=P.radial(0.5, 0.5))),
    (DomainSpec("disk", 1.0, 0.0, 24, 8), _mixed(P.constant(1.0)).__dict__),
]


def criterion_half_plane() -> list[Check]:
    checks = []
    for dom, kw in SPECTRAL_CONFIGS:
        prob = build_problem(dom, CoefficientSet(**kw))
        if prob.system.size > 1200:
            raise AssertionError(f"spectral config exceeds 1200 DOFs: {prob.system.size}")
        rep = analyze_spectrum(prob.system)
        fd = check_dissipativity(rep)
        name = ",".join(f"{k}={v}" for k, v in kw.items()) or "all defaults"
        checks.append(Check.at_least(f"{dom.kind} {dom.n_theta}x{dom.n_r} [{name}]: min Re(nonzero lambda)",
                                      fd.min_real_part, fd.threshold))
    return checks


def criterion_no_imaginary() -> list[Check]:
    checks = []
    cases = [
        (COARSE_DISK, dict(d=P.constant(1.0), kappa=P.constant(1.0))),
        (COARSE_DISK, dict(d=P.constant(1.0))),
        (DomainSpec("annulus", 1.0, 0.5, 24, 4), dict(d=P.constant(1.0), kappa=P.angular(1.0, 0.5, 3))),
        (DomainSpec("annulus", 1.0, 0.5, 24, 4), dict(d=P.constant(1.0), delta=P.constant(1.0))),
    ]
    for dom, kw in cases:
        prob = build_problem(dom, CoefficientSet(**kw))
        rep = analyze_spectrum(prob.system)
        audit = imaginary_axis_audit(rep, prob.coeffs)
        tag = f"{dom.kind} {dom.n_theta}x{dom.n_r} kappa={'0' if prob.coeffs.kappa_is_zero else '!0'}"
        checks.append(Check.equals(f"{tag}: near-axis eigenvalues (tol 1e-7)", audit.near_axis.size, 0,
                                   audit.asserted and bool(audit.passed), f"gap {audit.spectral_gap:.3e}"))
    return checks


def _smooth_state(prob: Problem, which: int) -> np.ndarray:
    sysm = prob.system
    x, y = prob.mesh.nodes.T
    theta = np.arctan2(prob.boundary.nodes[:, 1], prob.boundary.nodes[:, 0])
    if which == 0:
        return sysm.pack(W=1.0)
    if which == 1:
        return sysm.pack(U=x * y + 0.5, V=0.3 * np.cos(2 * theta), W=1.0 - (x**2 + y**2),
                         Z=0.2 * np.sin(theta))
    return random_state(sysm, np.random.default_rng(SEED + 3))


def criterion_asymptotic_limits() -> list[Check]:
    checks = []
    cases = [
        ("kappa!=0", dict(d=P.constant(1.0), kappa=P.constant(1.0)), 200.0),
        ("kappa!=0 mixed", dict(d=P.radial(0.5, 0.5), kappa=P.angular(1.0, 0.5, 2),
                                delta=P.constant(0.5)), 200.0),
        ("kappa=0", dict(d=P.constant(1.0)), 400.0),
        ("kappa=0 mixed", dict(d=P.radial(0.5, 0.5), delta=P.angular(1.0, 0.5, 1)), 400.0),
    ]
    for name, kw, t_end in cases:
        prob = build_problem(COARSE_DISK, CoefficientSet(**kw))
        for which in range(3):
            X0 = _smooth_state(prob, which)
            t0 = time.perf_counter()
            out = asymptotics(prob, X0, prob.default_dt(), t_end)
            secs = time.perf_counter() - t0
            checks.append(Check.at_most(f"{name} X0#{which}: |X(T)-Pi_N X0|_H/|X0|_H", out.error, 1e-4,
                                        f"predicted {out.predicted}, measured {out.measured}"))
            checks.append(Check.at_most(f"{name} X0#{which}: runtime [s]", secs, 120.0))
    return checks


def criterion_special_solution() -> list[Check]:
    prob = build_problem(COARSE_DISK, CoefficientSet(kappa=P.angular(1.0, 0.5, 2), delta=P.constant(0.5),
                                                     sigma=P.angular(1.0, 0.3, 3)))
    dt = prob.default_dt()
    return special_solution_checks(prob, dt, n_steps=2000, u1=1.5)


def criterion_vstar_constant() -> list[Check]:
    checks = []
    for sigma, kappa, rho0 in ((1.0, 2.0, 1.0), (0.7, 1.5, 3.0), (2.0, 0.25, 0.5)):
        prob = build_problem(COARSE_DISK, CoefficientSet(sigma=P.constant(sigma), kappa=P.constant(kappa),
                                                         rho0=rho0))
        V = solve_vstar(prob.disc.surf, rho0)
        checks.append(Check.at_most(f"sigma={sigma}, kappa={kappa}, rho0={rho0}: max |V* + rho0/kappa|",
                                    np.abs(V + rho0 / kappa).max(), 1e-12))
    return checks


def criterion_projectors() -> list[Check]:
    checks = []
    cases = [
        ("kappa!=0", _mixed(P.constant(1.0))),
        ("kappa=0", _mixed(P.constant(0.0))),
    ]
    for name, co in cases:
        prob = build_problem(COARSE_DISK, co)
        sysm = prob.system
        Pj = build_projectors(sysm)
        fun = prob.disc.functionals
        rng = np.random.default_rng(SEED + 4)
        idem = total = l1 = l2 = 0.0
        for _ in range(100):
            X = random_state(sysm, rng)
            s = np.abs(X).max()
            PN, PM = Pj.pi_N(X), Pj.pi_M(X)
            idem = max(idem, np.abs(Pj.pi_N(PN) - PN).max() / s)
            total = max(total, np.abs(PN + PM - X).max() / s)
            l1 = max(l1, abs(fun.L1(PM)) / s)
            l2 = max(l2, abs(fun.L2(PM)) / s)
        checks += [Check.at_most(f"{name}: Pi_N^2 = Pi_N", idem, 1e-12),
                   Check.at_most(f"{name}: Pi_N + Pi_M = I", total, 1e-12),
                   Check.at_most(f"{name}: L1(Pi_M X) = 0", l1, 1e-12)]
        if Pj.case == "kappa_zero":
            checks.append(Check.at_most(f"{name}: L2(Pi_M X) = 0", l2, 1e-12))
        checks.append(Check(f"{name}: det C > 0", Pj.detC, 0.0, Pj.detC > 0, op=">"))
    for d0, delta0, rho0, c in ((1.0, 1.0, 1.0, 1.0), (0.5, 2.0, 1.5, 0.8), (3.0, 0.0, 2.0, 2.0)):
        prob = build_problem(COARSE_DISK, CoefficientSet(d=P.constant(d0), delta=P.constant(delta0),
                                                         rho0=rho0, c=c))
        Pj = build_projectors(prob.system)
        om, ga = prob.disc.omega_measure, prob.disc.gamma_measure
        expected = d0 * om * delta0 * ga + rho0 * c**2 * ga**2
        checks.append(Check.at_most(f"d={d0}, delta={delta0}, rho0={rho0}, c={c}: det C arithmetic",
                                    abs(Pj.detC - expected) / expected, 1e-12,
                                    f"det C = {Pj.detC:.12g}"))
    return checks


def criterion_temporal_order() -> list[Check]:
    prob = build_problem(COARSE_DISK, CoefficientSet(kappa=P.constant(1.0)))
    X0 = _smooth_state(prob, 1)
    r = temporal_order(prob, X0, dt=0.0125, t_end=10.0)
    return [Check("observed order (dt=0.0125, 0.00625, 0.003125)", r["order"], 2.0,
                  1.8 <= r["order"] <= 2.2, "must lie in [1.8, 2.2]", op="~")]


def criterion_undamped_limits() -> list[Check]:
    checks = []
    cases = [
        ("kappa!=0", dict(delta=P.constant(1.0), kappa=P.constant(2.0))),
        ("kappa!=0 angular", dict(delta=P.constant(1.0), kappa=P.angular(1.0, 0.5, 2))),
        ("kappa=0", dict(delta=P.constant(1.0))),
    ]
    for name, kw in cases:
        prob = build_problem(COARSE_DISK, CoefficientSet(**kw))
        for which in (0, 1):
            out = asymptotics(prob, _smooth_state(prob, which), prob.default_dt(), 400.0)
            checks.append(Check.at_most(f"{name} X0#{which}: limit constants discrepancy", out.error, 1e-3,
                                        f"predicted {out.predicted}, measured {out.measured}"))
    return checks


CRITERIA: list[tuple[int, str, Callable[[], list[Check]]]] = [
    (1, "energy identity per step", criterion_energy_identity),
    (2, "L1 (and L2 when kappa=0) invariance", criterion_l1_invariance),
    (3, "conservative case: energy and time reversal", criterion_conservative),
    (4, "kernel structure", criterion_kernel),
    (5, "dissipation identity", criterion_dissipation),
    (6, "half-plane spectrum", criterion_half_plane),
    (7, "no imaginary spectrum under full damping", criterion_no_imaginary),
    (8, "asymptotic limits for d != 0", criterion_asymptotic_limits),
    (9, "special exact solution for d = 0", criterion_special_solution),
    (10, "v* for constant coefficients", criterion_vstar_constant),
    (11, "projector algebra and det C", criterion_projectors),
    (12, "temporal order of accuracy", criterion_temporal_order),
    (13, "d = 0 limits with boundary damping", criterion_undamped_limits),
]


def evaluate_criterion(number: int) -> CriterionResult:
    _, title, fn = next(c for c in CRITERIA if c[0] == number)
    t0 = time.perf_counter()
    checks = fn()
    return CriterionResult(number, title, checks, time.perf_counter() - t0)


def run_all(echo: Callable[[str], None] | None = print) -> list[CriterionResult]:
    results = []
    for number, _, _ in CRITERIA:
        res = evaluate_criterion(number)
        results.append(res)
        if echo:
            echo(res.line())
            for c in res.checks:
                echo("    " + c.line())
    return results
