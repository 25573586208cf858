import numpy as np
import pytest

from abcwave.coefficients import Profile
from abcwave.experiments import build_problem
from abcwave.coefficients import CoefficientSet
from abcwave.spectral import analyze_spectrum, check_dissipativity, imaginary_axis_audit, write_spectrum

from conftest import COARSE, problem


def test_kernel_dims(damped, damped_k0):
    assert analyze_spectrum(damped.system).kernel_dim == 1
    assert analyze_spectrum(damped_k0.system).kernel_dim == 2


def test_conservative_spectrum_is_oscillatory(conservative):
    rep = analyze_spectrum(conservative.system)
    assert np.abs(rep.eigenvalues.real).max() <= 1e-8 * rep.scale
    assert check_dissipativity(rep).passed
    assert rep.flags["conjugate_symmetric"]


def test_damped_spectrum(damped, damped_k0):
    for p in (damped, damped_k0):
        rep = analyze_spectrum(p.system, vectors=True)
        assert check_dissipativity(rep).passed
        audit = imaginary_axis_audit(rep, p.coeffs)
        assert audit.asserted and audit.passed
        assert audit.near_axis.size == 0 and audit.spectral_gap > 0
        assert rep.max_eigen_residual <= 1e-8


def test_vanishing_d_is_listing_only(mixed):
    audit = imaginary_axis_audit(analyze_spectrum(mixed.system), mixed.coeffs)
    assert not audit.asserted and audit.passed is None


def test_negated_damping_fails():
    prob = build_problem(COARSE, CoefficientSet(d=Profile.constant(-1.0), kappa=Profile.constant(1.0)),
                         validate=False)
    finding = check_dissipativity(analyze_spectrum(prob.system))
    assert not finding.passed
    assert finding.offending.size > 0 and finding.offending.real.min() < 0


def test_write_spectrum(tmp_path, damped):
    write_spectrum(analyze_spectrum(damped.system), tmp_path)
    lines = (tmp_path / "spectrum.csv").read_text().splitlines()
    assert lines[0] == "re,im" and len(lines) == damped.system.size + 1
    assert (tmp_path / "spectrum_summary.json").exists()
