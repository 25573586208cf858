import csv
import json

import pytest

from abcwave.cli import main

BASE = """
[domain]
kind = disk
n_theta = 12
n_r = 3

[coefficients]
{coeffs}

[initial]
{initial}

[stepper]
{stepper}
"""


def write(tmp_path, coeffs="", initial="u1 = constant:1", stepper="t_end = 2"):
    p = tmp_path / "run.cfg"
    p.write_text(BASE.format(coeffs=coeffs, initial=initial, stepper=stepper))
    return p


def test_simulate_outputs(tmp_path):
    cfg = write(tmp_path, "d = constant:1\nkappa = constant:1",
                stepper="t_end = 1\ndt = 0.1\n[output]\nsnapshot_times = 0.5")
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
    for f in ("timeseries.csv", "manifest.json", "nodes.csv", "snapshots/snapshot_t0.5.csv"):
        assert (out / f).exists(), f
    man = json.loads((out / "manifest.json").read_text())
    assert man["mesh"]["nodes"] == 37 and man["mesh"]["dofs"] == 2 * (37 + 12)
    assert man["flags"]["case"] == "kappa_nonzero"
    assert man["config"]["stepper"]["dt"] == 0.1


def test_deterministic_outputs(tmp_path):
    cfg = write(tmp_path, "d = radial:0,1", initial="random = true\nseed = 3")
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--config", str(cfg), "--out", str(a)]) == 0
    assert main(["simulate", "--config", str(cfg), "--out", str(b)]) == 0
    for f in ("timeseries.csv", "final_state.csv"):
        assert (a / f).read_bytes() == (b / f).read_bytes()
    c = tmp_path / "c"
    main(["simulate", "--config", str(cfg), "--out", str(c), "--seed", "4"])
    assert (a / "final_state.csv").read_bytes() != (c / "final_state.csv").read_bytes()


def test_config_error_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.cfg"
    p.write_text("[coefficients]\nsigm = 1\n")
    assert main(["simulate", "--config", str(p)]) == 2
    assert "sigm" in capsys.readouterr().err


def test_steady_without_kappa_is_config_error(tmp_path):
    assert main(["steady", "--config", str(write(tmp_path)), "--out", str(tmp_path / "o")]) == 2


def test_steady_writes_vstar(tmp_path):
    out = tmp_path / "o"
    assert main(["steady", "--config", str(write(tmp_path, "kappa = constant:2")), "--out", str(out)]) == 0
    rows = (out / "vstar.csv").read_text().splitlines()
    assert rows[0] == "node_id,x,y,vstar" and len(rows) == 13
    assert float(rows[1].split(",")[3]) == pytest.approx(-0.5, abs=1e-12)


def test_verify_conservative(tmp_path, capsys):
    cfg = write(tmp_path, "kappa = constant:1", initial="random = true\nseed = 1")
    out = tmp_path / "o"
    assert main(["verify", "--config", str(cfg), "--out", str(out)]) == 0
    with open(out / "verify.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert rows and all(r["passed"] == "1" for r in rows)
    assert "[PASS]" in capsys.readouterr().out


def test_spectrum(tmp_path):
    out = tmp_path / "o"
    assert main(["spectrum", "--config", str(write(tmp_path, "d = constant:1")), "--out", str(out)]) == 0
    assert (out / "spectrum.csv").exists() and (out / "spectrum_summary.json").exists()


@pytest.mark.parametrize("kappa, t_end, keys", [
    ("kappa = constant:1", 200, {"c1"}),
    ("kappa = constant:0", 400, {"c2", "c3"}),
])
def test_asymptotics(tmp_path, kappa, t_end, keys):
    cfg = write(tmp_path, f"d = constant:1\n{kappa}", stepper=f"t_end = {t_end}\nrecord_every = 100")
    out = tmp_path / "o"
    assert main(["asymptotics", "--config", str(cfg), "--out", str(out)]) == 0
    summary = json.loads((out / "asymptotics.json").read_text())
    assert set(summary["predicted"]) == keys and summary["error"] <= 1e-4


def test_asymptotics_failure_exit_code(tmp_path, capsys):
    cfg = write(tmp_path, "d = constant:1\nkappa = constant:1", stepper="t_end = 1")
    assert main(["asymptotics", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    assert "first failed check" in capsys.readouterr().err


def test_convergence(tmp_path):
    cfg = write(tmp_path, "kappa = constant:1", initial="u0 = radial:0.5,-0.5\nu1 = radial:1,-1",
                stepper="dt = 0.0125\nt_end = 2")
    out = tmp_path / "o"
    assert main(["convergence", "--config", str(cfg), "--out", str(out)]) == 0
    assert (out / "convergence_dt.csv").exists()
    assert len((out / "convergence_mesh.csv").read_text().splitlines()) == 4
