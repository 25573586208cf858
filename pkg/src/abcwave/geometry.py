"""Structured polar triangulations of the disk and the annulus.

The acoustic boundary is always the outer circle.  For the annulus the inner
circle carries the homogeneous Neumann condition, which is natural in the
weak form and needs no boundary mesh of its own.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

from .errors import DegenerateTriangle, InvalidSpec


@dataclass(frozen=True)
class DomainSpec:
    kind: Literal["disk", "annulus"] = "disk"
    outer_radius: float = 1.0
    inner_radius: float = 0.0
    n_theta: int = 16
    n_r: int = 4

    def validate(self) -> None:
        if self.kind not in ("disk", "annulus"):
            raise InvalidSpec(f"unknown domain kind {self.kind!r}")
        if not self.outer_radius > 0:
            raise InvalidSpec("outer_radius must be > 0")
        if self.n_theta < 8:
            raise InvalidSpec(f"n_theta must be >= 8, got {self.n_theta}")
        if self.kind == "disk":
            if self.n_r < 2:
                raise InvalidSpec(f"n_r must be >= 2 for a disk, got {self.n_r}")
        else:
            if not 0 < self.inner_radius < self.outer_radius:
                raise InvalidSpec("annulus needs 0 < inner_radius < outer_radius")
            if self.n_r < 1:
                raise InvalidSpec(f"n_r must be >= 1 for an annulus, got {self.n_r}")


@dataclass(frozen=True)
class Mesh2D:
    nodes: np.ndarray  # (n, 2)
    triangles: np.ndarray  # (m, 3), counterclockwise
    gamma1_nodes: np.ndarray  # cyclic order on the outer circle
    gamma0_nodes: np.ndarray  # cyclic order on the inner circle (empty for a disk)
    areas: np.ndarray = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def edges(self) -> np.ndarray:
        """Unique undirected edges as sorted index pairs."""
        t = self.triangles
        e = np.vstack([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        return np.unique(np.sort(e, axis=1), axis=0)

    def h_min(self) -> float:
        e = self.edges()
        return float(np.linalg.norm(self.nodes[e[:, 0]] - self.nodes[e[:, 1]], axis=1).min())


@dataclass(frozen=True)
class BoundaryMesh1D:
    """Closed polygon through the Γ1 nodes; edge k joins positions k and k+1 (mod n)."""

    nodes: np.ndarray  # (n, 2) coordinates in boundary order
    mesh_ids: np.ndarray  # bulk node index of each boundary position
    edge_lengths: np.ndarray
    periodic: bool = True

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def edge_pairs(self) -> np.ndarray:
        k = np.arange(self.n_nodes)
        return np.column_stack([k, (k + 1) % self.n_nodes])


def triangle_areas(nodes: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Signed areas; positive for counterclockwise triangles."""
    p0, p1, p2 = (nodes[triangles[:, i]] for i in range(3))
    return 0.5 * ((p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1])
                  - (p2[:, 0] - p0[:, 0]) * (p1[:, 1] - p0[:, 1]))


def _polygon(radius: float, n: int) -> np.ndarray:
    theta = 2.0 * np.pi * np.arange(n) / n
    return radius * np.column_stack([np.cos(theta), np.sin(theta)])


def _boundary_from(nodes: np.ndarray, ids: np.ndarray) -> BoundaryMesh1D:
    pts = nodes[ids]
    lengths = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
    return BoundaryMesh1D(nodes=pts, mesh_ids=np.asarray(ids), edge_lengths=lengths)


def circle_boundary(radius: float, n_theta: int) -> BoundaryMesh1D:
    """Stand-alone inscribed-polygon boundary with ``n_theta >= 3`` vertices."""
    if n_theta < 3 or not radius > 0:
        raise InvalidSpec("circle_boundary needs radius > 0 and n_theta >= 3")
    pts = _polygon(radius, n_theta)
    return _boundary_from(pts, np.arange(n_theta))


def build_mesh(spec: DomainSpec) -> tuple[Mesh2D, BoundaryMesh1D]:
    """Polar mesh: rings of ``n_theta`` nodes, two triangles per ring quad.

    Disk: center node plus ``n_r`` rings at radii ``R1*j/n_r`` with a center
    fan.  Annulus: ``n_r + 1`` rings from ``R0`` to ``R1``.  Node k of the
    outer ring sits at angle ``2*pi*k/n_theta``.
    """
    spec.validate()
    nt = spec.n_theta
    R1 = spec.outer_radius
    chunks = []
    tris = []
    if spec.kind == "disk":
        radii = R1 * np.arange(1, spec.n_r + 1) / spec.n_r
        chunks.append(np.zeros((1, 2)))
        offset = 1
        k = np.arange(nt)
        tris.append(np.column_stack([np.zeros(nt, dtype=int), offset + k, offset + (k + 1) % nt]))
    else:
        radii = np.linspace(spec.inner_radius, R1, spec.n_r + 1)
        offset = 0
    for r in radii:
        chunks.append(_polygon(r, nt))
    # ring j occupies [offset + j*nt, offset + (j+1)*nt)
    k = np.arange(nt)
    for j in range(len(radii) - 1):
        a = offset + j * nt + k
        b = offset + j * nt + (k + 1) % nt
        c = a + nt
        d = b + nt
        tris.append(np.column_stack([a, d, b]))
        tris.append(np.column_stack([a, c, d]))
    nodes = np.vstack(chunks)
    # snap the outer ring exactly onto the circle
    nodes[offset + (len(radii) - 1) * nt:] = _polygon(R1, nt)
    triangles = np.vstack(tris).astype(np.int64)
    areas = triangle_areas(nodes, triangles)
    if np.any(areas <= 0):
        raise DegenerateTriangle(f"triangle {int(np.argmin(areas))} has area {areas.min():.3e}")
    gamma1 = offset + (len(radii) - 1) * nt + k
    gamma0 = k.copy() if spec.kind == "annulus" else np.zeros(0, dtype=np.int64)
    mesh = Mesh2D(nodes=nodes, triangles=triangles, gamma1_nodes=gamma1,
                  gamma0_nodes=gamma0, areas=areas)
    return mesh, _boundary_from(nodes, gamma1)


def mesh_from_arrays(nodes, triangles, gamma1_nodes, gamma0_nodes=()) -> Mesh2D:
    """Wrap raw arrays (e.g. a single-triangle test fixture) into a Mesh2D."""
    nodes = np.asarray(nodes, dtype=float)
    triangles = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
    areas = triangle_areas(nodes, triangles)
    if np.any(areas <= 0):
        raise DegenerateTriangle(f"triangle {int(np.argmin(areas))} has area {areas.min():.3e}")
    return Mesh2D(nodes, triangles, np.asarray(gamma1_nodes, dtype=np.int64),
                  np.asarray(gamma0_nodes, dtype=np.int64), areas)


def boundary_measure(bm: BoundaryMesh1D) -> float:
    return float(bm.edge_lengths.sum())


def domain_measure(mesh: Mesh2D) -> float:
    return float(mesh.areas.sum())


def euler_characteristic(mesh: Mesh2D) -> int:
    """V - E + F; 1 for a disk, 0 for an annulus."""
    return mesh.n_nodes - len(mesh.edges()) + mesh.n_triangles


def boundary_loops(mesh: Mesh2D) -> int:
    """Number of closed boundary loops (edges used by exactly one triangle)."""
    t = mesh.triangles
    e = np.sort(np.vstack([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]), axis=1)
    uniq, counts = np.unique(e, axis=0, return_counts=True)
    bedges = uniq[counts == 1]
    # union-find over boundary edges
    parent = {int(v): int(v) for v in np.unique(bedges)}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in bedges:
        ra, rb = find(int(a)), find(int(b))
        if ra != rb:
            parent[ra] = rb
    return len({find(v) for v in parent})


def write_mesh_csv(mesh: Mesh2D, outdir: str | Path) -> None:
    """Write ``nodes.csv``, ``triangles.csv`` and ``gamma1.csv``."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / "nodes.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "x", "y"])
        for i, (x, y) in enumerate(mesh.nodes):
            w.writerow([i, repr(float(x)), repr(float(y))])
    with open(outdir / "triangles.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "n0", "n1", "n2"])
        for i, tri in enumerate(mesh.triangles):
            w.writerow([i, *map(int, tri)])
    with open(outdir / "gamma1.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id"])
        for i in mesh.gamma1_nodes:
            w.writerow([int(i)])


def write_vtk(mesh: Mesh2D, path: str | Path, point_data: dict[str, np.ndarray] | None = None) -> None:
    """Legacy-ASCII VTK unstructured grid of the triangulation."""
    lines = ["# vtk DataFile Version 3.0", "abcwave mesh", "ASCII", "DATASET UNSTRUCTURED_GRID",
             f"POINTS {mesh.n_nodes} double"]
    lines += [f"{x!r} {y!r} 0.0" for x, y in mesh.nodes.tolist()]
    m = mesh.n_triangles
    lines.append(f"CELLS {m} {4 * m}")
    lines += [f"3 {a} {b} {c}" for a, b, c in mesh.triangles.tolist()]
    lines.append(f"CELL_TYPES {m}")
    lines += ["5"] * m
    if point_data:
        lines.append(f"POINT_DATA {mesh.n_nodes}")
        for name, values in point_data.items():
            values = np.asarray(values, dtype=float)
            lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
            lines += [repr(v) for v in values.tolist()]
    Path(path).write_text("\n".join(lines) + "\n")
