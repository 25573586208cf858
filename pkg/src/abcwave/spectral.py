"""Dense eigenstructure of the discrete generator on coarse meshes."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .coefficients import NodalCoefficients
from .linalg import DENSE_CAP, CapExceeded, dense_eigenvalues, kernel_basis, subspace_distance
from .system import BlockSystem, null_space_expected

TOL_ZERO_REL = 1e-8
TOL_AXIS = 1e-7
HALF_PLANE_REL = 1e-8


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    scale: float  # max |lambda|
    tol_zero: float
    tol_axis: float
    kernel_dim: int
    kernel_basis: np.ndarray = field(repr=False)
    kernel_distance: float  # projector distance to the expected stationary states
    zero_eigen_count: int
    min_real_part_nonzero: float
    near_imaginary: np.ndarray
    max_eigen_residual: float | None = None
    flags: dict = field(default_factory=dict)

    @property
    def nonzero(self) -> np.ndarray:
        return self.eigenvalues[np.abs(self.eigenvalues) > self.tol_zero]

    def summary(self) -> dict:
        return {
            "n_eigenvalues": int(self.eigenvalues.size),
            "scale": self.scale,
            "kernel_dim": self.kernel_dim,
            "kernel_distance": self.kernel_distance,
            "zero_eigen_count": self.zero_eigen_count,
            "min_real_part_nonzero": self.min_real_part_nonzero,
            "n_near_imaginary": int(self.near_imaginary.size),
            "max_eigen_residual": self.max_eigen_residual,
            "flags": self.flags,
        }


def generator_dense(system: BlockSystem) -> np.ndarray:
    return system.mass_factor.solve(system.S.toarray())


def analyze_spectrum(system: BlockSystem, cap: int = DENSE_CAP, tol_axis: float = TOL_AXIS,
                     vectors: bool = False) -> SpectrumReport:
    if system.size > cap:
        raise CapExceeded(f"{system.size} unknowns exceed the dense cap {cap}; coarsen the mesh")
    A = generator_dense(system)
    if vectors:
        lam, X = dense_eigenvalues(A, vectors=True, cap=cap)
        R = A @ X - X * lam[None, :]
        res = np.linalg.norm(R, axis=0) / (np.linalg.norm(A, "fro") * np.linalg.norm(X, axis=0))
        max_res = float(res.max())
    else:
        lam = dense_eigenvalues(A, cap=cap)
        max_res = None
    scale = float(np.abs(lam).max())
    tol_zero = TOL_ZERO_REL * scale
    nz = np.abs(lam) > tol_zero
    ker = kernel_basis(system.S)
    expected = null_space_expected(system)
    dist = subspace_distance(ker.basis, expected.basis) if ker.dim == expected.dim else 1.0
    near = lam[nz & (np.abs(lam.real) < tol_axis)]
    # spectrum of a real matrix is closed under conjugation
    pts = np.column_stack([lam.real, lam.imag])
    conj_gap = float(cKDTree(pts).query(pts * [1.0, -1.0])[0].max())
    flags = {
        "ambiguous_rank": ker.ambiguous_rank,
        "kernel_matches_expected": ker.dim == expected.dim and dist <= 1e-8,
        "conjugate_symmetric": conj_gap <= 1e-8 * max(scale, 1.0),
        "kappa_is_zero": system.kappa_is_zero,
    }
    return SpectrumReport(
        eigenvalues=lam, scale=scale, tol_zero=tol_zero, tol_axis=tol_axis,
        kernel_dim=ker.dim, kernel_basis=ker.basis, kernel_distance=dist,
        zero_eigen_count=int((~nz).sum()),
        min_real_part_nonzero=float(lam[nz].real.min()) if nz.any() else float("nan"),
        near_imaginary=near, max_eigen_residual=max_res, flags=flags,
    )


@dataclass(frozen=True)
class DissipativityFinding:
    passed: bool
    min_real_part: float
    threshold: float
    offending: np.ndarray


def check_dissipativity(report: SpectrumReport) -> DissipativityFinding:
    """Nonzero eigenvalues of ``A_h`` must lie in the closed right half-plane."""
    thr = -HALF_PLANE_REL * report.scale
    lam = report.nonzero
    bad = lam[lam.real < thr]
    return DissipativityFinding(bad.size == 0, report.min_real_part_nonzero, thr, bad)


@dataclass(frozen=True)
class AxisAudit:
    asserted: bool  # False when d vanishes somewhere: listing only
    passed: bool | None
    near_axis: np.ndarray
    spectral_gap: float


def imaginary_axis_audit(report: SpectrumReport, coeffs: NodalCoefficients) -> AxisAudit:
    """No nonzero purely imaginary eigenvalues when d > 0 at every bulk node.

    Where d vanishes on part of the domain the discrete problem lacks unique
    continuation, so near-axis eigenvalues are only listed.
    """
    asserted = coeffs.d_positive
    passed = report.near_imaginary.size == 0 if asserted else None
    return AxisAudit(asserted, passed, report.near_imaginary, report.min_real_part_nonzero)


def write_spectrum(report: SpectrumReport, outdir: str | Path) -> None:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    order = np.lexsort((report.eigenvalues.imag, report.eigenvalues.real))
    with open(outdir / "spectrum.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["re", "im"])
        for z in report.eigenvalues[order]:
            w.writerow([repr(float(z.real)), repr(float(z.imag))])
    (outdir / "spectrum_summary.json").write_text(json.dumps(report.summary(), indent=2) + "\n")
