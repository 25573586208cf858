"""Coefficient fields: mu, sigma, delta, kappa on the acoustic boundary, d in the bulk."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import PositivityViolation, ValidationError
from .geometry import BoundaryMesh1D, Mesh2D

PROFILE_KINDS = ("constant", "angular", "radial", "nodal")


@dataclass(frozen=True)
class Profile:
    """Scalar field sampled at mesh nodes.

    ``constant(a)``; ``angular(a, b, k)`` is ``a + b cos(k theta)``;
    ``radial(a, b)`` is ``a + b r``; ``nodal`` maps mesh node ids to values.
    """

    kind: str
    params: tuple[float, ...] = ()
    values: dict[int, float] = field(default_factory=dict, compare=False, repr=False)
    source: str | None = None

    @classmethod
    def constant(cls, a: float) -> Profile:
        return cls("constant", (float(a),))

    @classmethod
    def angular(cls, a: float, b: float, k: float) -> Profile:
        return cls("angular", (float(a), float(b), float(k)))

    @classmethod
    def radial(cls, a: float, b: float) -> Profile:
        return cls("radial", (float(a), float(b)))

    @classmethod
    def nodal(cls, values: dict[int, float], source: str | None = None) -> Profile:
        return cls("nodal", (), {int(k): float(v) for k, v in values.items()}, source)

    @classmethod
    def from_csv(cls, path: str | Path) -> Profile:
        """Read a ``node_id,value`` file (an optional header row is skipped)."""
        values = {}
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].strip().startswith("#"):
                    continue
                try:
                    values[int(row[0])] = float(row[1])
                except ValueError:
                    if not values:  # header
                        continue
                    raise
        return cls.nodal(values, source=str(path))

    @classmethod
    def parse(cls, text: str, base_dir: Path | None = None) -> Profile:
        """Parse ``kind:params``, e.g. ``angular:1,0.5,3`` or ``nodal:kappa.csv``.

        A bare number is shorthand for ``constant:<number>``.
        """
        text = text.strip()
        kind, _, rest = text.partition(":")
        kind = kind.strip()
        if not _:
            try:
                return cls.constant(float(text))
            except ValueError:
                raise ValueError(f"profile {text!r} is not of the form kind:params") from None
        if kind == "nodal":
            path = Path(rest.strip())
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            if not path.exists():
                raise ValueError(f"nodal profile file {path} does not exist")
            return cls.from_csv(path)
        arity = {"constant": 1, "angular": 3, "radial": 2}
        if kind not in arity:
            raise ValueError(f"unknown profile kind {kind!r}; expected one of {PROFILE_KINDS}")
        params = tuple(float(p) for p in rest.split(",") if p.strip())
        if len(params) != arity[kind]:
            raise ValueError(f"{kind} profile takes {arity[kind]} parameters, got {len(params)}")
        return cls(kind, params)

    def __str__(self) -> str:
        if self.kind == "nodal":
            return f"nodal:{self.source or '<inline>'}"
        return f"{self.kind}:" + ",".join(repr(p) for p in self.params)

    @property
    def is_structurally_zero(self) -> bool:
        if self.kind == "constant":
            return self.params[0] == 0.0
        if self.kind == "angular":
            return self.params[0] == 0.0 and self.params[1] == 0.0
        if self.kind == "radial":
            return self.params == (0.0, 0.0)
        return False

    def evaluate(self, points: np.ndarray, ids: np.ndarray) -> np.ndarray:
        """Sample at ``points`` (coordinates) whose mesh node ids are ``ids``."""
        points = np.asarray(points, dtype=float)
        n = len(points)
        if self.kind == "constant":
            out = np.full(n, self.params[0])
        elif self.kind == "angular":
            a, b, k = self.params
            theta = np.arctan2(points[:, 1], points[:, 0])
            out = a + b * np.cos(k * theta)
        elif self.kind == "radial":
            a, b = self.params
            out = a + b * np.hypot(points[:, 0], points[:, 1])
        elif self.kind == "nodal":
            missing = [int(i) for i in ids if int(i) not in self.values]
            if missing:
                raise ValueError(f"nodal profile {self.source or ''} lacks node {missing[0]}")
            out = np.array([self.values[int(i)] for i in ids], dtype=float)
        else:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        return out


@dataclass(frozen=True)
class CoefficientSet:
    mu: Profile = field(default_factory=lambda: Profile.constant(1.0))
    sigma: Profile = field(default_factory=lambda: Profile.constant(1.0))
    delta: Profile = field(default_factory=lambda: Profile.constant(0.0))
    kappa: Profile = field(default_factory=lambda: Profile.constant(0.0))
    d: Profile = field(default_factory=lambda: Profile.constant(0.0))
    rho0: float = 1.0
    c: float = 1.0


@dataclass(frozen=True)
class NodalCoefficients:
    """Coefficients sampled on the mesh; boundary arrays follow Γ1 order."""

    mu: np.ndarray
    sigma: np.ndarray
    delta: np.ndarray
    kappa: np.ndarray
    d: np.ndarray
    rho0: float
    c: float

    @property
    def kappa_is_zero(self) -> bool:
        return not np.any(self.kappa)

    @property
    def d_is_zero(self) -> bool:
        return not np.any(self.d)

    @property
    def delta_is_zero(self) -> bool:
        return not np.any(self.delta)

    @property
    def d_positive(self) -> bool:
        return bool(np.all(self.d > 0))

    def flags(self) -> dict[str, bool]:
        return {"kappa_is_zero": self.kappa_is_zero, "d_is_zero": self.d_is_zero,
                "delta_is_zero": self.delta_is_zero, "d_positive": self.d_positive}


def evaluate(coeffs: CoefficientSet, mesh: Mesh2D, bm: BoundaryMesh1D,
             validate: bool = True) -> NodalCoefficients:
    """Sample every field at its nodes and check the sign assumptions.

    With ``validate=False`` no sign check is made; this exists only to build
    deliberately invalid systems in tests.
    """
    bids = bm.mesh_ids
    fields = {
        name: getattr(coeffs, name).evaluate(bm.nodes, bids)
        for name in ("mu", "sigma", "delta", "kappa")
    }
    fields["d"] = coeffs.d.evaluate(mesh.nodes, np.arange(mesh.n_nodes))
    if not coeffs.rho0 > 0:
        raise ValidationError("rho0", f"must be > 0, got {coeffs.rho0}")
    if not coeffs.c > 0:
        raise ValidationError("c", f"must be > 0, got {coeffs.c}")
    for name, vals in fields.items():
        ids = np.arange(mesh.n_nodes) if name == "d" else bids
        bad = np.flatnonzero(~np.isfinite(vals))
        if bad.size:
            raise PositivityViolation(name, int(ids[bad[0]]), float(vals[bad[0]]), "finiteness")
        if not validate:
            continue
        if name in ("mu", "sigma"):
            bad = np.flatnonzero(vals <= 0)
            bound = "> 0"
        else:
            bad = np.flatnonzero(vals < 0)
            bound = ">= 0"
        if bad.size:
            raise PositivityViolation(name, int(ids[bad[0]]), float(vals[bad[0]]), bound)
    return NodalCoefficients(rho0=float(coeffs.rho0), c=float(coeffs.c), **fields)
