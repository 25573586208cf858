import numpy as np
import pytest

from abcwave.experiments import Check, temporal_order
from abcwave.system import build_projectors, energy
from abcwave.timeint import StepperConfig, run, step, write_snapshot, write_timeseries


def test_null_state_is_fixed(damped, damped_k0):
    for p in (damped, damped_k0):
        for v in (p.system.pack(U=1.0), p.system.pack(U=0.3, V=0.7) if p.coeffs.kappa_is_zero else None):
            if v is None:
                continue
            np.testing.assert_allclose(step(v, p.system, 0.05), v, atol=1e-14)


def test_conservative_energy_1000_steps(conservative, rng):
    sysm = conservative.system
    X = rng.standard_normal(sysm.size)
    E0 = energy(X, sysm)
    res = run(X, sysm, StepperConfig(dt=0.05, t_end=50.0), keep_energies=True)
    assert res.steps == 1000
    assert np.abs(res.energies - E0).max() <= 1e-10 * E0


def test_zero_and_stationary_runs(damped):
    sysm = damped.system
    res = run(np.zeros(sysm.size), sysm, StepperConfig(dt=0.1, t_end=1.0))
    assert all(r.E == 0.0 and r.mean_u == 0.0 for r in res.reports)
    res = run(sysm.pack(U=1.0), sysm, StepperConfig(dt=0.1, t_end=1.0))
    for r in res.reports:
        assert r.mean_u == pytest.approx(1.0, abs=1e-14)
        assert abs(r.E) <= 1e-14


def test_backward_undoes_forward(mixed, rng):
    X0 = rng.standard_normal(mixed.system.size)
    X = step(step(X0, mixed.system, 0.05), mixed.system, -0.05)
    np.testing.assert_allclose(X, X0, atol=1e-12)


def test_long_run_reaches_projection(damped):
    sysm = damped.system
    x, y = damped.mesh.nodes.T
    X0 = sysm.pack(U=x * y, W=1.0 + x)
    res = run(X0, sysm, StepperConfig(dt=damped.default_dt(), t_end=200.0, record_every=1000))
    limit = build_projectors(sysm).pi_N(X0)
    assert sysm.h_norm(res.final - limit) <= 1e-4 * sysm.h_norm(X0)


def test_energy_decays_monotonically(mixed, rng):
    res = run(rng.standard_normal(mixed.system.size), mixed.system, StepperConfig(dt=0.05, t_end=5.0))
    assert res.max_energy_increase <= 1e-12


def test_second_order(conservative):
    x, y = conservative.mesh.nodes.T
    X0 = conservative.system.pack(U=np.cos(np.pi * x), W=x * y)
    out = temporal_order(conservative, X0, dt=0.0125, t_end=2.0)
    assert 1.8 <= out["order"] <= 2.2


def test_stop_energy_ratio(damped):
    X0 = damped.system.pack(W=1.0)
    res = run(X0, damped.system, StepperConfig(dt=0.05, t_end=500.0, stop_energy_ratio=1e-6))
    assert res.stopped_early
    assert res.reports[-1].E < 1e-6 * res.reports[0].E


def test_trackers_see_every_step(damped):
    seen = []
    run(damped.system.pack(W=1.0), damped.system, StepperConfig(dt=0.1, t_end=1.0, record_every=5),
        trackers=[lambda k, t, X: seen.append(k)])
    assert seen == list(range(11))


def test_writers(tmp_path, mixed, rng):
    res = run(rng.standard_normal(mixed.system.size), mixed.system, StepperConfig(dt=0.1, t_end=1.0))
    write_timeseries(res.reports, tmp_path / "ts.csv")
    lines = (tmp_path / "ts.csv").read_text().splitlines()
    assert lines[0] == "t,E,L1,L2,diss_inc,identity_residual,mean_u,mean_v"
    assert len(lines) == 12
    write_snapshot(mixed.system, res.final, tmp_path / "snap.csv")
    rows = (tmp_path / "snap.csv").read_text().splitlines()
    assert rows[0] == "node_id,u,v,w,z" and len(rows) == mixed.mesh.n_nodes + 1


def test_check_line_comparator():
    assert "<=" in Check.at_most("a", 1.0, 2.0).line()
    assert ">=" in Check.at_least("a", 1.0, 0.0).line()
    assert Check.at_least("a", -1.0, 0.0).passed is False
