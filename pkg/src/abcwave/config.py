"""Run configuration: a sectioned ``key = value`` file.

Sections are ``[domain]``, ``[coefficients]``, ``[initial]``, ``[stepper]``
and ``[output]``.  Profiles are written ``kind:params`` (see
:meth:`abcwave.coefficients.Profile.parse`).  Unknown sections and keys are
rejected so that typos never fall back to defaults silently.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path

from .coefficients import CoefficientSet, Profile
from .errors import InvalidSpec, ParseError, ValidationError
from .geometry import DomainSpec

EXPERIMENTS = ("simulate", "spectrum", "steady", "verify", "convergence", "asymptotics")

# section -> key -> (type tag, default)
SCHEMA: dict[str, dict[str, tuple[str, object]]] = {
    "domain": {
        "kind": ("str", "disk"),
        "outer_radius": ("float", 1.0),
        "inner_radius": ("float", 0.0),
        "n_theta": ("int", 16),
        "n_r": ("int", 4),
    },
    "coefficients": {
        "mu": ("profile", "constant:1"),
        "sigma": ("profile", "constant:1"),
        "delta": ("profile", "constant:0"),
        "kappa": ("profile", "constant:0"),
        "d": ("profile", "constant:0"),
        "rho0": ("float", 1.0),
        "c": ("float", 1.0),
    },
    "initial": {
        "u0": ("profile", "constant:0"),
        "v0": ("profile", "constant:0"),
        "u1": ("profile", "constant:0"),
        "v1": ("profile", "constant:0"),
        "random": ("bool", False),
        "seed": ("int", None),
    },
    "stepper": {
        "dt": ("float_or_auto", "auto"),
        "t_end": ("float", 100.0),
        "record_every": ("int", 1),
        "solver_tol": ("float", 1e-12),
        "stop_energy_ratio": ("float", None),
        "tolerance": ("float", 1e-4),
    },
    "output": {
        "dir": ("str", "out"),
        "snapshot_times": ("floats", ()),
        "vtk": ("bool", False),
        "dump_matrices": ("bool", False),
        "seed": ("int", 0),
    },
}


@dataclass(frozen=True)
class InitialDataSpec:
    u0: Profile = field(default_factory=lambda: Profile.constant(0.0))
    v0: Profile = field(default_factory=lambda: Profile.constant(0.0))
    u1: Profile = field(default_factory=lambda: Profile.constant(0.0))
    v1: Profile = field(default_factory=lambda: Profile.constant(0.0))
    random: bool = False
    seed: int | None = None


@dataclass(frozen=True)
class RunConfig:
    domain: DomainSpec
    coefficients: CoefficientSet
    initial: InitialDataSpec
    dt: float | None  # None: 0.5 * h_min / c
    t_end: float = 100.0
    record_every: int = 1
    solver_tol: float = 1e-12
    stop_energy_ratio: float | None = None
    tolerance: float = 1e-4
    out_dir: Path = Path("out")
    snapshot_times: tuple[float, ...] = ()
    vtk: bool = False
    dump_matrices: bool = False
    seed: int = 0
    experiment: str = "simulate"
    source: str | None = None

    def resolved(self) -> dict:
        """Plain-data echo of every resolved setting, for the run manifest."""
        co = self.coefficients
        return {
            "experiment": self.experiment,
            "source": self.source,
            "domain": asdict(self.domain),
            "coefficients": {k: str(getattr(co, k)) for k in ("mu", "sigma", "delta", "kappa", "d")}
            | {"rho0": co.rho0, "c": co.c},
            "initial": {k: str(getattr(self.initial, k)) for k in ("u0", "v0", "u1", "v1")}
            | {"random": self.initial.random, "seed": self.initial.seed},
            "stepper": {"dt": self.dt if self.dt is not None else "auto", "t_end": self.t_end,
                        "record_every": self.record_every, "solver_tol": self.solver_tol,
                        "stop_energy_ratio": self.stop_energy_ratio, "tolerance": self.tolerance},
            "output": {"dir": str(self.out_dir), "snapshot_times": list(self.snapshot_times),
                       "vtk": self.vtk, "dump_matrices": self.dump_matrices, "seed": self.seed},
        }


def _convert(tag: str, raw: str, where: str, line: int, base_dir: Path):
    try:
        if tag == "str":
            return raw
        if tag == "int":
            return int(raw)
        if tag == "float":
            return float(raw)
        if tag == "float_or_auto":
            return None if raw == "auto" else float(raw)
        if tag == "bool":
            low = raw.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if tag == "floats":
            return tuple(float(p) for p in raw.replace(",", " ").split())
        if tag == "profile":
            return Profile.parse(raw, base_dir)
    except ValueError as exc:
        raise ParseError(f"{where}: {exc}", line) from None
    raise AssertionError(tag)


def parse_text(text: str, base_dir: Path | str = ".", experiment: str = "simulate",
               source: str | None = None) -> RunConfig:
    base_dir = Path(base_dir)
    values: dict[str, dict[str, object]] = {s: {} for s in SCHEMA}
    section = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ParseError(f"malformed section header {line!r}", lineno)
            section = line[1:-1].strip()
            if section not in SCHEMA:
                raise ParseError(f"unknown section [{section}]", lineno)
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {line!r}", lineno)
        if section is None:
            raise ParseError("key outside of any section", lineno)
        key, _, val = (p.strip() for p in line.partition("="))
        if key not in SCHEMA[section]:
            raise ParseError(f"unknown key {key!r} in [{section}]", lineno)
        if key in values[section]:
            raise ParseError(f"duplicate key {key!r} in [{section}]", lineno)
        tag = SCHEMA[section][key][0]
        values[section][key] = _convert(tag, val, f"{section}.{key}", lineno, base_dir)

    def get(sec, key):
        if key in values[sec]:
            return values[sec][key]
        tag, default = SCHEMA[sec][key]
        if tag == "profile":
            return Profile.parse(default)
        if tag == "float_or_auto" and default == "auto":
            return None
        return default

    if experiment not in EXPERIMENTS:
        raise ValidationError("experiment", f"unknown experiment {experiment!r}")
    dom = DomainSpec(**{k: get("domain", k) for k in SCHEMA["domain"]})
    try:
        dom.validate()
    except InvalidSpec as exc:
        raise ValidationError("domain", str(exc)) from None
    co = CoefficientSet(**{k: get("coefficients", k) for k in SCHEMA["coefficients"]})
    if not co.rho0 > 0:
        raise ValidationError("coefficients.rho0", "must be > 0")
    if not co.c > 0:
        raise ValidationError("coefficients.c", "must be > 0")
    init = InitialDataSpec(**{k: get("initial", k) for k in SCHEMA["initial"]})
    if init.random and init.seed is None:
        raise ValidationError("initial.seed", "random initial data needs an explicit seed")
    dt = get("stepper", "dt")
    if dt is not None and not dt > 0:
        raise ValidationError("stepper.dt", "must be > 0 or 'auto'")
    t_end = get("stepper", "t_end")
    if not t_end >= 0:
        raise ValidationError("stepper.t_end", "must be >= 0")
    record_every = get("stepper", "record_every")
    if record_every < 1:
        raise ValidationError("stepper.record_every", "must be >= 1")
    out_dir = Path(get("output", "dir"))
    return RunConfig(
        domain=dom, coefficients=co, initial=init, dt=dt, t_end=t_end,
        record_every=record_every, solver_tol=get("stepper", "solver_tol"),
        stop_energy_ratio=get("stepper", "stop_energy_ratio"),
        tolerance=get("stepper", "tolerance"), out_dir=out_dir,
        snapshot_times=get("output", "snapshot_times"), vtk=get("output", "vtk"),
        dump_matrices=get("output", "dump_matrices"), seed=get("output", "seed"),
        experiment=experiment, source=source,
    )


def parse_config(path: str | Path, experiment: str = "simulate") -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return parse_text(text, base_dir=path.parent, experiment=experiment, source=str(path))
