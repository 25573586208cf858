import numpy as np
import pytest

from abcwave.coefficients import Profile
from abcwave.elliptic import limit_constants_undamped, solve_vstar
from abcwave.errors import SingularSystem

from conftest import problem


def test_vstar_constant_coefficients():
    prob = problem(kappa=Profile.constant(2.0))
    np.testing.assert_allclose(solve_vstar(prob.disc.surf, 1.0), -0.5, atol=1e-12)


def test_vstar_compatibility():
    prob = problem(kappa=Profile.angular(1.0, 0.5, 2))
    surf = prob.disc.surf
    V = solve_vstar(surf, 1.0)
    one = np.ones(prob.disc.n_gamma)
    # integrating the discrete equation against 1 removes the stiffness term
    assert abs(one @ (surf.Mkappa @ V) + one @ (surf.M @ one)) <= 1e-12
    assert np.ptp(V) > 1e-3


def test_vstar_needs_kappa():
    with pytest.raises(SingularSystem):
        solve_vstar(problem().disc.surf, 1.0)


def test_undamped_limits():
    prob = problem(delta=Profile.constant(1.0))
    sysm = prob.system
    lim = limit_constants_undamped(np.zeros(sysm.size), prob.disc)
    assert lim.ut_limit == 0.0 and lim.v_limit == 0.0
    lim = limit_constants_undamped(sysm.pack(V=1.0), prob.disc)
    assert lim.v_limit == pytest.approx(1.0, rel=1e-14)

    prob = problem(delta=Profile.constant(1.0), kappa=Profile.constant(2.0))
    lim = limit_constants_undamped(prob.system.pack(W=1.0), prob.disc)
    om, ga = prob.disc.omega_measure, prob.disc.gamma_measure
    assert lim.ut_limit == pytest.approx(om / (om + ga / 2), rel=1e-13)
    np.testing.assert_allclose(lim.v_profile(prob.disc.n_gamma), -0.5 * lim.ut_limit, rtol=1e-12)
