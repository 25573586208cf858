import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abcwave.errors import InvalidSpec
from abcwave.geometry import (
    DomainSpec,
    boundary_loops,
    boundary_measure,
    build_mesh,
    circle_boundary,
    domain_measure,
    euler_characteristic,
    mesh_from_arrays,
    write_mesh_csv,
)


def test_disk_counts():
    mesh, bm = build_mesh(DomainSpec("disk", 1.0, 0.0, 8, 2))
    assert (mesh.n_nodes, mesh.n_triangles) == (17, 24)
    assert bm.n_nodes == 8
    assert euler_characteristic(mesh) == 1
    assert boundary_loops(mesh) == 1


def test_annulus_counts():
    mesh, bm = build_mesh(DomainSpec("annulus", 1.0, 0.5, 8, 1))
    assert (mesh.n_nodes, mesh.n_triangles) == (16, 16)
    assert euler_characteristic(mesh) == 0
    assert boundary_loops(mesh) == 2
    assert len(mesh.gamma0_nodes) == 8


def test_inscribed_square_perimeter():
    assert boundary_measure(circle_boundary(1.0, 4)) == pytest.approx(4 * math.sqrt(2), rel=1e-14)


@pytest.mark.parametrize("radius", [1.0, 2.0])
def test_perimeter_limit(radius):
    assert boundary_measure(circle_boundary(radius, 1000)) == pytest.approx(2 * math.pi * radius, rel=1e-4)


def test_area_limits():
    disk, _ = build_mesh(DomainSpec("disk", 1.0, 0.0, 256, 32))
    ann, _ = build_mesh(DomainSpec("annulus", 1.0, 0.5, 256, 16))
    assert domain_measure(disk) == pytest.approx(math.pi, rel=1e-3)
    assert domain_measure(ann) == pytest.approx(0.75 * math.pi, rel=1e-3)


def test_single_triangle_fixture():
    mesh = mesh_from_arrays([[0, 0], [1, 0], [0, 1]], [[0, 1, 2]], [])
    assert domain_measure(mesh) == pytest.approx(0.5)


def test_invalid_specs():
    with pytest.raises(InvalidSpec):
        DomainSpec("disk", 1.0, 0.0, 6, 2).validate()
    with pytest.raises(InvalidSpec):
        DomainSpec("annulus", 1.0, 1.2, 8, 2).validate()
    with pytest.raises(InvalidSpec):
        DomainSpec("square", 1.0, 0.0, 8, 2).validate()


@settings(max_examples=20, deadline=None)
@given(kind=st.sampled_from(["disk", "annulus"]), n_theta=st.integers(8, 40), n_r=st.integers(2, 8),
       r1=st.floats(0.5, 3.0))
def test_mesh_invariants(kind, n_theta, n_r, r1):
    r0 = 0.4 * r1 if kind == "annulus" else 0.0
    mesh, bm = build_mesh(DomainSpec(kind, r1, r0, n_theta, n_r))
    assert np.all(mesh.areas > 0)
    # counterclockwise orientation, computed independently of the stored areas
    p = mesh.nodes[mesh.triangles]
    cross = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - \
            (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0])
    assert np.all(cross > 0)
    assert np.abs(np.hypot(*bm.nodes.T) - r1).max() <= 1e-12 * r1
    theta = np.unwrap(np.arctan2(bm.nodes[:, 1], bm.nodes[:, 0]))
    assert np.all(np.diff(theta) > 0)
    area = 0.5 * n_theta * math.sin(2 * math.pi / n_theta) * (r1**2 - r0**2)
    assert domain_measure(mesh) == pytest.approx(area, rel=1e-12)
    assert euler_characteristic(mesh) == (1 if kind == "disk" else 0)


def test_mesh_csv(tmp_path):
    mesh, _ = build_mesh(DomainSpec("disk", 1.0, 0.0, 8, 2))
    write_mesh_csv(mesh, tmp_path)
    lines = (tmp_path / "nodes.csv").read_text().splitlines()
    assert len(lines) == mesh.n_nodes + 1
    assert len((tmp_path / "triangles.csv").read_text().splitlines()) == mesh.n_triangles + 1
