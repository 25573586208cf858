"""P1 Galerkin matrices for the coupled bulk/boundary weak form.

Bulk terms come from testing the wave equation with H^1 functions:
``(w', phi) + (d w, phi) + c^2 (grad u, grad phi) - c^2 <z, phi>_Γ1 = 0``.
Boundary terms come from the membrane equation tested with H^1(Γ1)
functions: ``<mu z', psi> + <sigma v_s, psi_s> + <delta z, psi> + <kappa v, psi>
+ rho0 <w, psi> = 0``.  No mass lumping is applied anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .coefficients import NodalCoefficients
from .errors import DegenerateTriangle, DimensionMismatch
from .geometry import BoundaryMesh1D, Mesh2D, triangle_areas
from .linalg import as_csr

_MASS_REF = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0


def _triple_product_table() -> np.ndarray:
    # integral of phi_i phi_j phi_k over a triangle, divided by its area
    C = np.empty((3, 3, 3))
    for i in range(3):
        for j in range(3):
            for k in range(3):
                distinct = len({i, j, k})
                C[i, j, k] = {1: 1 / 10, 2: 1 / 30, 3: 1 / 60}[distinct]
    return C


_TRIPLE = _triple_product_table()


@dataclass(frozen=True)
class BulkMatrices:
    M: sp.csr_matrix
    K: sp.csr_matrix
    Md: sp.csr_matrix


@dataclass(frozen=True)
class SurfaceMatrices:
    M: sp.csr_matrix  # plain boundary mass
    Mmu: sp.csr_matrix
    Mdelta: sp.csr_matrix
    Mkappa: sp.csr_matrix
    Ksigma: sp.csr_matrix

    @property
    def kappa_is_zero(self) -> bool:
        return self.Mkappa.nnz == 0

    @property
    def delta_is_zero(self) -> bool:
        return self.Mdelta.nnz == 0


@dataclass(frozen=True)
class TraceMap:
    """0/1 selection ``T`` with ``(T U)[k] = U[mesh_ids[k]]``."""

    T: sp.csr_matrix

    def __call__(self, U: np.ndarray) -> np.ndarray:
        return self.T @ U

    def adjoint(self, G: np.ndarray) -> np.ndarray:
        return self.T.T @ G


def _scatter(rows, cols, vals, n) -> sp.csr_matrix:
    return as_csr(sp.coo_matrix((vals.ravel(), (rows.ravel(), cols.ravel())), shape=(n, n)))


def assemble_bulk(mesh: Mesh2D, d_nodal: np.ndarray) -> BulkMatrices:
    nodes, tris = mesh.nodes, mesh.triangles
    n = len(nodes)
    d_nodal = np.asarray(d_nodal, dtype=float)
    if d_nodal.shape != (n,):
        raise DimensionMismatch(f"d has shape {d_nodal.shape}, mesh has {n} nodes")
    area = triangle_areas(nodes, tris)
    if np.any(area <= 0):
        raise DegenerateTriangle(f"triangle {int(np.argmin(area))} has area {area.min():.3e}")
    x = nodes[tris, 0]
    y = nodes[tris, 1]
    # gradients of barycentric coordinates, scaled by 2*area
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    Kloc = (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) / (4.0 * area[:, None, None])
    Mloc = area[:, None, None] * _MASS_REF[None]
    Mdloc = area[:, None, None] * np.einsum("ijk,tk->tij", _TRIPLE, d_nodal[tris])
    rows = np.repeat(tris[:, :, None], 3, axis=2)
    cols = np.repeat(tris[:, None, :], 3, axis=1)
    Md = _scatter(rows, cols, Mdloc, n) if np.any(d_nodal) else sp.csr_matrix((n, n))
    return BulkMatrices(M=_scatter(rows, cols, Mloc, n), K=_scatter(rows, cols, Kloc, n), Md=Md)


def assemble_surface(bm: BoundaryMesh1D, mu, sigma, delta, kappa) -> SurfaceMatrices:
    """Periodic 1-D P1 matrices with edge-averaged weights."""
    n = bm.n_nodes
    h = bm.edge_lengths
    e = bm.edge_pairs()
    rows = np.repeat(e[:, :, None], 2, axis=2)
    cols = np.repeat(e[:, None, :], 2, axis=1)
    mass_ref = np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0
    stiff_ref = np.array([[1.0, -1.0], [-1.0, 1.0]])

    def edge_mean(w):
        w = np.asarray(w, dtype=float)
        if w.shape != (n,):
            raise DimensionMismatch(f"boundary weight has shape {w.shape}, expected ({n},)")
        return 0.5 * (w[e[:, 0]] + w[e[:, 1]])

    def mass(w):
        if w is not None and not np.any(w):
            return sp.csr_matrix((n, n))
        wbar = np.ones(len(h)) if w is None else edge_mean(w)
        return _scatter(rows, cols, (h * wbar)[:, None, None] * mass_ref[None], n)

    sbar = edge_mean(sigma)
    Ks = _scatter(rows, cols, (sbar / h)[:, None, None] * stiff_ref[None], n)
    return SurfaceMatrices(M=mass(None), Mmu=mass(mu), Mdelta=mass(delta),
                           Mkappa=mass(kappa), Ksigma=Ks)


def build_trace(mesh: Mesh2D, bm: BoundaryMesh1D) -> TraceMap:
    m = bm.n_nodes
    ids = np.asarray(bm.mesh_ids)
    if len(np.unique(ids)) != m or ids.max(initial=-1) >= mesh.n_nodes:
        raise DimensionMismatch("boundary ids must be distinct bulk nodes")
    T = sp.csr_matrix((np.ones(m), (np.arange(m), ids)), shape=(m, mesh.n_nodes))
    return TraceMap(T)


@dataclass(frozen=True)
class Functionals:
    """Conserved-functional covectors on states ordered (U, V, W, Z)."""

    l1: np.ndarray
    l2: np.ndarray
    one_omega: np.ndarray
    one_gamma: np.ndarray

    def L1(self, X: np.ndarray) -> float:
        return float(self.l1 @ X)

    def L2(self, X: np.ndarray) -> float:
        return float(self.l2 @ X)


def assemble_functionals(bulk: BulkMatrices, surf: SurfaceMatrices, trace: TraceMap,
                         rho0: float, c: float) -> Functionals:
    """Discrete L1 = int w + int d u - c^2 int v and L2 = int mu z + delta v + rho0 u."""
    n = bulk.M.shape[0]
    m = surf.M.shape[0]
    one_o = np.ones(n)
    one_g = np.ones(m)
    zo, zg = np.zeros(n), np.zeros(m)
    l1 = np.concatenate([bulk.Md @ one_o, -c**2 * (surf.M @ one_g), bulk.M @ one_o, zg])
    l2 = np.concatenate([rho0 * trace.adjoint(surf.M @ one_g), surf.Mdelta @ one_g, zo,
                         surf.Mmu @ one_g])
    return Functionals(l1=l1, l2=l2, one_omega=one_o, one_gamma=one_g)


@dataclass(frozen=True)
class Discretization:
    """Everything assembled for one mesh and coefficient set."""

    mesh: Mesh2D
    boundary: BoundaryMesh1D
    coeffs: NodalCoefficients
    bulk: BulkMatrices
    surf: SurfaceMatrices
    trace: TraceMap
    functionals: Functionals

    @property
    def n_omega(self) -> int:
        return self.mesh.n_nodes

    @property
    def n_gamma(self) -> int:
        return self.boundary.n_nodes

    @property
    def omega_measure(self) -> float:
        return float(self.bulk.M.sum())

    @property
    def gamma_measure(self) -> float:
        return float(self.surf.M.sum())


def assemble_all(mesh: Mesh2D, bm: BoundaryMesh1D, coeffs: NodalCoefficients) -> Discretization:
    bulk = assemble_bulk(mesh, coeffs.d)
    surf = assemble_surface(bm, coeffs.mu, coeffs.sigma, coeffs.delta, coeffs.kappa)
    trace = build_trace(mesh, bm)
    fun = assemble_functionals(bulk, surf, trace, coeffs.rho0, coeffs.c)
    return Discretization(mesh, bm, coeffs, bulk, surf, trace, fun)


def write_coo(A, path: str | Path) -> None:
    """Dump a sparse matrix as ``row col value`` lines (0-based indices)."""
    A = sp.coo_matrix(A)
    with open(path, "w") as fh:
        fh.write(f"# {A.shape[0]} {A.shape[1]} {A.nnz}\n")
        for i, j, v in zip(A.row.tolist(), A.col.tolist(), A.data.tolist()):
            fh.write(f"{i} {j} {v!r}\n")
