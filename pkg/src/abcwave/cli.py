"""Command-line runner: ``abcwave <subcommand> --config <path> [--out <dir>] [--seed <n>]``.

Exit codes: 0 when every check passes, 1 on the first failed check (named on
stderr), 2 on configuration errors.

Config file layout (``key = value`` lines, ``#`` comments)::

    [domain]        kind = disk|annulus, outer_radius, inner_radius, n_theta, n_r
    [coefficients]  mu, sigma, delta, kappa, d   profiles as kind:params
                    rho0, c                     positive floats
    [initial]       u0, v0, u1, v1              profiles or nodal:<file.csv>
                    random = true, seed = <n>   seeded standard normal state
    [stepper]       dt = auto|<float>, t_end, record_every, solver_tol,
                    stop_energy_ratio, tolerance
    [output]        dir, snapshot_times = t1,t2,..., vtk, dump_matrices, seed

Profiles: ``constant:a``, ``angular:a,b,k`` (a + b cos k theta),
``radial:a,b`` (a + b r), ``nodal:values.csv`` (``node_id,value``).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .assembly import write_coo
from .config import EXPERIMENTS, RunConfig, parse_config
from .elliptic import solve_vstar
from .errors import ConfigError, SingularSystem
from .experiments import (
    LIMIT_STOP_RATIO,
    Check,
    asymptotics,
    build_problem,
    initial_state,
    invariant_suite,
    limit_constant_refinement,
    temporal_order,
)
from .geometry import write_mesh_csv, write_vtk
from .spectral import analyze_spectrum, check_dissipativity, imaginary_axis_audit, write_spectrum
from .timeint import StepperConfig, run, write_snapshot, write_timeseries

log = logging.getLogger("abcwave")

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, Path):
        return str(x)
    raise TypeError(f"not serialisable: {type(x).__name__}")


def write_checks(checks: list[Check], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("check", "value", "op", "reference", "passed", "detail"))
        for c in checks:
            w.writerow((c.name, repr(c.value), c.op, repr(c.tolerance), int(c.passed), c.detail))


def _finish(checks: list[Check]) -> int:
    for c in checks:
        print(c.line())
    failed = next((c for c in checks if not c.passed), None)
    if failed is not None:
        print(f"first failed check: {failed.name}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_PASS


class Runner:
    """Builds the discretization for one config and dispatches on the experiment."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.out = Path(cfg.out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.problem = build_problem(cfg.domain, cfg.coefficients)
        self.dt = cfg.dt if cfg.dt is not None else self.problem.default_dt()

    def manifest(self, extra: dict | None = None) -> None:
        p = self.problem
        flags = p.coeffs.flags()
        data = {
            "version": __version__,
            "config": self.cfg.resolved(),
            "mesh": {"nodes": p.mesh.n_nodes, "triangles": p.mesh.n_triangles,
                     "gamma1_nodes": p.disc.n_gamma, "dofs": p.system.size,
                     "h_min": p.mesh.h_min(), "dt": self.dt},
            "flags": flags | {"case": "kappa_zero" if flags["kappa_is_zero"] else "kappa_nonzero"},
        }
        if extra:
            data |= extra
        _write_json(self.out / "manifest.json", data)

    def initial(self) -> np.ndarray:
        return initial_state(self.cfg.initial, self.problem)

    def stepper(self) -> StepperConfig:
        c = self.cfg
        return StepperConfig(dt=self.dt, t_end=c.t_end, record_every=c.record_every,
                             solver_tol=c.solver_tol, stop_energy_ratio=c.stop_energy_ratio)

    # -- experiments --------------------------------------------------------

    def simulate(self) -> int:
        p, cfg = self.problem, self.cfg
        scfg = self.stepper()
        dt = scfg.effective_dt
        targets = {min(round(t / dt), scfg.n_steps): t for t in cfg.snapshot_times}
        snap_dir = self.out / "snapshots"
        if targets:
            snap_dir.mkdir(exist_ok=True)

        def snapshots(k, t, X):
            if k in targets:
                write_snapshot(p.system, X, snap_dir / f"snapshot_t{targets[k]:g}.csv")
                if cfg.vtk:
                    U, _, W, _ = p.system.unpack(X)
                    write_vtk(p.mesh, snap_dir / f"snapshot_t{targets[k]:g}.vtk", {"u": U, "u_t": W})

        res = run(self.initial(), p.system, scfg, trackers=[snapshots])
        write_timeseries(res.reports, self.out / "timeseries.csv")
        write_snapshot(p.system, res.final, self.out / "final_state.csv")
        write_mesh_csv(p.mesh, self.out)
        if cfg.vtk:
            write_vtk(p.mesh, self.out / "mesh.vtk")
        if cfg.dump_matrices:
            self._dump_matrices()
        E0 = res.reports[0].E
        checks = [
            Check.at_most("energy identity per step", res.max_identity_residual / (1 + E0), 1e-10),
            Check.at_most("L1 drift", res.max_L1_drift / (1 + abs(res.reports[0].L1)), 1e-10),
        ]
        if p.coeffs.kappa_is_zero:
            checks.append(Check.at_most("L2 drift", res.max_L2_drift / (1 + abs(res.reports[0].L2)), 1e-10))
        self.manifest({"run": {"steps": res.steps, "t_final": res.t_final,
                               "stopped_early": res.stopped_early}})
        return _finish(checks)

    def _dump_matrices(self) -> None:
        d = self.out / "matrices"
        d.mkdir(exist_ok=True)
        b, s = self.problem.disc.bulk, self.problem.disc.surf
        mats = {"M": b.M, "K": b.K, "Md": b.Md, "MG": s.M, "MG_mu": s.Mmu, "MG_delta": s.Mdelta,
                "MG_kappa": s.Mkappa, "KG_sigma": s.Ksigma, "T": self.problem.disc.trace.T,
                "S": self.problem.system.S, "Mblk": self.problem.system.Mblk}
        for name, A in mats.items():
            write_coo(A, d / f"{name}.coo")

    def spectrum(self) -> int:
        p = self.problem
        rep = analyze_spectrum(p.system, vectors=True)
        write_spectrum(rep, self.out)
        fd = check_dissipativity(rep)
        checks = [Check.equals("kernel matches stationary states", rep.kernel_dim,
                               2 if p.coeffs.kappa_is_zero else 1,
                               bool(rep.flags.get("kernel_matches_expected"))),
                  Check.at_least("min Re of nonzero eigenvalues", fd.min_real_part, fd.threshold)]
        audit = imaginary_axis_audit(rep, p.coeffs)
        if audit.asserted:
            checks.append(Check.equals("near-axis eigenvalues", audit.near_axis.size, 0, bool(audit.passed),
                                       f"gap {audit.spectral_gap:.3e}"))
        self.manifest({"spectrum": {"spectral_gap": audit.spectral_gap,
                                    "near_axis_count": int(audit.near_axis.size)}})
        return _finish(checks)

    def steady(self) -> int:
        p = self.problem
        V = solve_vstar(p.disc.surf, p.coeffs.rho0)
        A = p.disc.surf.Ksigma + p.disc.surf.Mkappa
        rhs = -p.coeffs.rho0 * (p.disc.surf.M @ np.ones(p.disc.n_gamma))
        resid = np.abs(A @ V - rhs).max() / max(np.abs(rhs).max(), 1e-300)
        bm = p.boundary
        with open(self.out / "vstar.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("node_id", "x", "y", "vstar"))
            for i, (x, y), v in zip(bm.mesh_ids, bm.nodes, V):
                w.writerow((int(i), repr(float(x)), repr(float(y)), repr(float(v))))
        self.manifest({"vstar": {"min": float(V.min()), "max": float(V.max()), "residual": resid}})
        return _finish([Check.at_most("v* residual", resid, 1e-10)])

    def verify(self) -> int:
        checks = invariant_suite(self.problem, self.initial(), self.dt, seed=self.cfg.seed)
        write_checks(checks, self.out / "verify.csv")
        self.manifest({"verify": {"checks": len(checks), "failed": sum(not c.passed for c in checks)}})
        return _finish(checks)

    def convergence(self) -> int:
        cfg = self.cfg
        order = temporal_order(self.problem, self.initial(), self.dt, cfg.t_end)
        with open(self.out / "convergence_dt.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("dt", "t_end", "diff_dt_dt2", "diff_dt2_dt4", "order"))
            w.writerow([repr(float(order[k])) for k in ("dt", "t_end", "diff_dt_dt2", "diff_dt2_dt4", "order")])
        rows = limit_constant_refinement(cfg.domain, cfg.coefficients, cfg.initial)
        with open(self.out / "convergence_mesh.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            for r in rows:
                w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
        self.manifest({"convergence": {"order": order["order"]}})
        return _finish([Check("observed temporal order", order["order"], 2.0,
                              1.8 <= order["order"] <= 2.2, "must lie in [1.8, 2.2]", op="~")])

    def asymptotics(self) -> int:
        cfg = self.cfg
        X0 = self.initial()
        stop = LIMIT_STOP_RATIO if cfg.stop_energy_ratio is None else cfg.stop_energy_ratio
        out = asymptotics(self.problem, X0, self.dt, cfg.t_end, stop, cfg.record_every)
        write_timeseries(out.reports, self.out / "timeseries.csv")
        summary = {"case": out.case, "predicted": out.predicted, "measured": out.measured,
                   "error": out.error, "tolerance": cfg.tolerance, "t_final": out.t_final,
                   "steps": out.steps, "d_is_zero": self.problem.coeffs.d_is_zero}
        _write_json(self.out / "asymptotics.json", summary)
        self.manifest({"asymptotics": summary})
        name = "limit constants discrepancy" if self.problem.coeffs.d_is_zero else "|X(T) - Pi_N X0|_H / |X0|_H"
        return _finish([Check.at_most(name, out.error, cfg.tolerance,
                                      f"predicted {out.predicted}, measured {out.measured}")])


def run_acceptance(out_dir: Path) -> int:
    from .acceptance import run_all

    out_dir.mkdir(parents=True, exist_ok=True)
    results = run_all()
    with open(out_dir / "verify.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("criterion", "title", "passed", "seconds"))
        for r in results:
            w.writerow((r.number, r.title, int(r.passed), f"{r.seconds:.2f}"))
    _write_json(out_dir / "manifest.json", {"version": __version__, "experiment": "verify",
                                            "acceptance": {r.number: r.passed for r in results}})
    failed = next((r for r in results if not r.passed), None)
    if failed is not None:
        print(f"first failed check: criterion {failed.number} ({failed.title}): "
              f"{failed.first_failure().name}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="abcwave", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, required=(name != "verify"),
                        help="run configuration" + (" (omit to run the acceptance suite)" if name == "verify" else ""))
        sp.add_argument("--out", type=Path, help="output directory (overrides [output] dir)")
        sp.add_argument("--seed", type=int, help="seed for random states (overrides config seeds)")
        sp.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "verify" and args.config is None:
        return run_acceptance(args.out or Path("out"))
    try:
        cfg = parse_config(args.config, experiment=args.command)
        if args.out is not None:
            cfg = replace(cfg, out_dir=args.out)
        if args.seed is not None:
            init = cfg.initial
            cfg = replace(cfg, seed=args.seed,
                          initial=replace(init, seed=args.seed) if init.random else init)
        runner = Runner(cfg)
        return getattr(runner, args.command)()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SingularSystem as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
