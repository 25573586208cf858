import numpy as np
import pytest

from abcwave.coefficients import CoefficientSet, Profile, evaluate
from abcwave.errors import PositivityViolation
from abcwave.geometry import DomainSpec, build_mesh


@pytest.fixture(scope="module")
def disk():
    return build_mesh(DomainSpec("disk", 1.0, 0.0, 16, 4))


def test_default_flags(disk):
    nod = evaluate(CoefficientSet(), *disk)
    assert nod.kappa_is_zero and nod.d_is_zero and nod.delta_is_zero


def test_angular_at_theta_zero(disk):
    mesh, bm = disk
    k = Profile.angular(1.0, 0.5, 3).evaluate(bm.nodes, bm.mesh_ids)
    i0 = int(np.argmin(np.abs(np.arctan2(bm.nodes[:, 1], bm.nodes[:, 0]))))
    assert k[i0] == pytest.approx(1.5, abs=1e-14)


def test_radial_center_and_boundary(disk):
    mesh, bm = disk
    nod = evaluate(CoefficientSet(d=Profile.radial(0.0, 1.0)), mesh, bm)
    assert nod.d[0] == 0.0
    np.testing.assert_allclose(nod.d[bm.mesh_ids], 1.0, atol=1e-12)
    assert not nod.d_is_zero
    assert not nod.d_positive


def test_positivity_violation_names_node(disk):
    with pytest.raises(PositivityViolation) as exc:
        evaluate(CoefficientSet(sigma=Profile.angular(0.5, 1.0, 1)), *disk)
    assert exc.value.field == "sigma"
    with pytest.raises(PositivityViolation):
        evaluate(CoefficientSet(d=Profile.constant(-1.0)), *disk)


def test_parse_forms(tmp_path):
    assert Profile.parse("2.5") == Profile.constant(2.5)
    assert Profile.parse("angular:1,0.5,3") == Profile.angular(1.0, 0.5, 3.0)
    assert Profile.parse("constant:0").is_structurally_zero
    with pytest.raises(ValueError):
        Profile.parse("radial:1")
    with pytest.raises(ValueError):
        Profile.parse("spline:1,2")
    f = tmp_path / "k.csv"
    f.write_text("node_id,value\n0,1.0\n1,2.0\n")
    p = Profile.parse("nodal:k.csv", tmp_path)
    np.testing.assert_allclose(p.evaluate(np.zeros((2, 2)), np.array([1, 0])), [2.0, 1.0])
    with pytest.raises(ValueError):
        p.evaluate(np.zeros((1, 2)), np.array([5]))


def test_nodal_zero_detected_after_evaluation(disk, tmp_path):
    mesh, bm = disk
    f = tmp_path / "kappa.csv"
    f.write_text("".join(f"{i},0\n" for i in bm.mesh_ids))
    nod = evaluate(CoefficientSet(kappa=Profile.from_csv(f)), mesh, bm)
    assert nod.kappa_is_zero
