import csv
import json
import math

import numpy as np
import pytest
from oracles import grid_local_minima

from fluxcantilever import cli
from fluxcantilever.cli import RunConfig

SYNTH_DOUBLE = {"synthetic": {"kinetic_phi": 0.005, "kinetic_theta": 0.005},
                "theta_0_mode": "degenerate", "grid": {"n_phi": 64, "n_theta": 64, "n_sigma": 8.0}}
SYNTH_HARMONIC = {"synthetic": {"kinetic_phi": 1e-5, "kinetic_theta": 1e-5},
                  "grid": {"n_phi": 127, "n_theta": 127, "n_sigma": 8.0},
                  "eigen": {"k": 1, "potential": "harmonic", "seed": 0}}
HALF_FLUX_GRID = {"theta_0_mode": "half_flux", "resolution": [201, 201]}


def run(tmp_path, command, config=None, *extra, name="out"):
    out = tmp_path / name
    argv = [command, "--output-dir", str(out)]
    if config is not None:
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(config))
        argv += ["--config", str(path)]
    return cli.main(argv + list(extra)), out


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_analyze_reference_device(tmp_path, capsys):
    code, out = run(tmp_path, "analyze")
    assert code == 0
    text = capsys.readouterr().out
    assert "beta_L        1.51927" in text
    report = json.loads((out / "analyze.json").read_text())
    assert report["modes"]["omega_Y_hz"] == pytest.approx(21122.5, rel=1e-3)
    assert report["derived"]["beta_L"] == pytest.approx(1.52, rel=1e-2)


def test_analyze_without_spring(tmp_path):
    code, out = run(tmp_path, "analyze", {"device": {"omega_i": 0.0}})
    assert code == 0
    assert json.loads((out / "analyze.json").read_text())["modes"]["omega_Y_hz"] == pytest.approx(17382.8, rel=1e-3)


def test_analyze_uncoupled(tmp_path, capsys):
    code, out = run(tmp_path, "analyze", {"device": {"B_x": 0.0}})
    assert code == 0
    assert "(uncoupled)" in capsys.readouterr().out
    modes = json.loads((out / "analyze.json").read_text())["modes"]
    assert modes["kappa"] == 0 and modes["uncoupled"] is True


def test_grid_minimum_near_origin(tmp_path):
    code, out = run(tmp_path, "grid", {"resolution": [81, 81]})
    assert code == 0
    rows = read_csv(out / "potential_grid.csv")
    assert rows[0] == ["phi_wb", "theta_rad", "V_over_h_hz"]
    data = [[float(x) for x in r] for r in rows[1:]]
    assert len(data) == 81 * 81
    phi, theta, _ = min(data, key=lambda r: r[2])
    meta = json.loads((out / "potential_grid.meta.json").read_text())
    assert abs(phi) < 1e-3 * 2.0678e-15
    assert abs(theta - math.pi / 2) < 1e-6
    assert meta["contour_interval_hz"] > 0


def test_grid_half_flux_two_equal_minima(tmp_path):
    cfg = dict(HALF_FLUX_GRID, window=[[-0.5 * 2.0678338484619295e-15, 1.5 * 2.0678338484619295e-15],
                                  [1.5707963267948966 - 0.005, 1.5707963267948966 + 0.002]])
    code, out = run(tmp_path, "grid", cfg)
    assert code == 0
    data = np.array([[float(x) for x in r] for r in read_csv(out / "potential_grid.csv")[1:]])
    values = data[:, 2].reshape(201, 201)
    found = grid_local_minima(values)
    assert len(found) == 2
    depths = [values[i, j] for i, j in found]
    ej_hz = 1.6455298923772669e-21 / 6.62607015e-34
    assert abs(depths[0] - depths[1]) < 1e-3 * ej_hz


def test_grid_two_by_two_and_json(tmp_path):
    code, out = run(tmp_path, "grid", {"resolution": [2, 2]})
    assert code == 0
    assert len(read_csv(out / "potential_grid.csv")) == 1 + 4
    code, out = run(tmp_path, "grid", {"resolution": [2, 2]}, "--format", "json", name="j")
    assert code == 0
    doc = json.loads((out / "potential_grid.json").read_text())
    assert len(doc["V_over_h_hz"]) == 2 and len(doc["V_over_h_hz"][0]) == 2


def test_sweep_kappa_increasing(tmp_path):
    code, out = run(tmp_path, "sweep", {"sweep": {"B_x": [0.01, 0.05, 9]}})
    assert code == 0
    rows = read_csv(out / "sweep.csv")[1:]
    kappa = [float(r[1]) for r in rows]
    assert len(kappa) == 9
    assert all(b > a for a, b in zip(kappa, kappa[1:]))


def test_sweep_single_point_matches_analyze(tmp_path):
    code, out = run(tmp_path, "sweep", {"sweep": {"B_x": [0.05, 0.05, 1]}})
    assert code == 0
    row = read_csv(out / "sweep.csv")[1]
    run(tmp_path, "analyze", {}, name="a")
    modes = json.loads((tmp_path / "a" / "analyze.json").read_text())["modes"]
    assert float(row[1]) == modes["kappa"]
    assert float(row[4]) == pytest.approx(2 * math.pi * modes["omega_Y_hz"], rel=1e-15)


def test_sweep_flags_rows_below_threshold(tmp_path):
    # Bx A = n Phi0 at Bx ~ 8.6e-5 T for n = 1
    code, out = run(tmp_path, "sweep", {"n": 1, "sweep": {"B_x": [0.0, 2e-4, 5]}})
    assert code == 0
    rows = read_csv(out / "sweep.csv")[1:]
    assert len(rows) == 5
    assert [r[-1] for r in rows] == ["invalid_for_n=1"] * 2 + ["ok"] * 3
    assert rows[0][1] == ""


def test_sweep_bad_range(tmp_path):
    assert run(tmp_path, "sweep", {"sweep": {"B_x": [0.05, 0.01, 3]}})[0] == 2
    assert run(tmp_path, "sweep", {}, name="b")[0] == 2


def test_groundstate_entangled(tmp_path):
    code, out = run(tmp_path, "groundstate", {"resolution": [21, 21]})
    assert code == 0
    doc = json.loads((out / "groundstate.json").read_text())
    assert doc["separable"] is False
    assert doc["entropy_nats"] > 0
    assert read_csv(out / "groundstate_grid.csv")[0] == ["phi_wb", "delta_rad", "psi", "abs_psi_sq"]
    code, out = run(tmp_path, "groundstate", {"resolution": [5, 5], "device": {"B_x": 0.0}}, name="b")
    assert json.loads((out / "groundstate.json").read_text())["separable"] is True


def test_doublewell_synthetic(tmp_path):
    code, out = run(tmp_path, "doublewell", SYNTH_DOUBLE)
    assert code == 0
    manifest = json.loads((out / "doublewell.json").read_text())
    assert manifest["delta_E_J"] > 0
    for name in manifest["state_files"]:
        assert read_csv(out / name)[0] == ["phi", "theta", "psi"]


def test_doublewell_rejects_single_well(tmp_path):
    cfg = dict(SYNTH_DOUBLE, theta_0_mode="value")
    assert run(tmp_path, "doublewell", cfg)[0] == 3


def test_eigen_harmonic_synthetic(tmp_path):
    code, out = run(tmp_path, "eigen", SYNTH_HARMONIC)
    assert code == 0
    manifest = json.loads((out / "eigen.json").read_text())
    assert manifest["energies_J"][0] == pytest.approx(manifest["harmonic_E0_J"], rel=1e-3, abs=0)


@pytest.mark.parametrize("command,config", [
    ("analyze", {}),
    ("grid", {"resolution": [31, 17]}),
    ("sweep", {"sweep": {"B_x": [0.01, 0.05, 5]}}),
    ("groundstate", {"resolution": [17, 17]}),
    ("doublewell", SYNTH_DOUBLE),
    ("eigen", dict(SYNTH_HARMONIC, grid={"n_phi": 48, "n_theta": 48, "n_sigma": 8.0})),
    ("reproduce-paper", None),
])
def test_outputs_byte_identical(tmp_path, command, config):
    code_a, a = run(tmp_path, command, config, name="a")
    code_b, b = run(tmp_path, command, config, name="b")
    assert code_a == code_b == 0
    files_a = sorted(p.name for p in a.iterdir())
    assert files_a == sorted(p.name for p in b.iterdir())
    assert files_a
    for name in files_a:
        assert (a / name).read_bytes() == (b / name).read_bytes()
    # nothing written outside the output directory
    assert sorted(p.name for p in tmp_path.iterdir()) == sorted(["a", "b"] + (["a.json", "b.json"] if config is not None else []))


def test_reproduce_passes(tmp_path, capsys):
    code, out = run(tmp_path, "reproduce-paper", None, "--json")
    assert code == 0
    rows = json.loads(capsys.readouterr().out)
    assert len(rows) == 10
    assert all(r["pass"] and r["provenance"] == "published" and r["source"] for r in rows)


def test_reproduce_detects_perturbed_inductance(tmp_path, capsys):
    code, _ = run(tmp_path, "reproduce-paper", None, "--set", "L=110e-12")
    assert code == 1
    text = capsys.readouterr().out
    assert "FAIL" in text
    failing = [ln for ln in text.splitlines() if ln.endswith("FAIL")]
    assert any("beta_L" in ln for ln in failing)


def test_config_round_trip():
    cfg = RunConfig.from_dict({"n": 2, "branch": "minus", "device": {"B_x": 0.03},
                               "sweep": {"B_x": [0.01, 0.02, 3]}, "output_format": "json"})
    text = json.dumps(cfg.to_dict(), sort_keys=True)
    again = RunConfig.from_dict(json.loads(text))
    assert json.dumps(again.to_dict(), sort_keys=True) == text


@pytest.mark.parametrize("config,argv", [
    ({"bogus": 1}, []),
    ({"branch": "sideways"}, []),
    ({"device": {"L": -1.0}}, []),
    ({"resolution": [1, 5]}, []),
    (None, ["--set", "L"]),
    (None, ["--set", "L=abc"]),
])
def test_config_errors_exit_2(tmp_path, config, argv):
    assert run(tmp_path, "analyze", config, *argv)[0] == 2


def test_missing_config_file_exit_2(tmp_path):
    assert cli.main(["analyze", "--config", str(tmp_path / "nope.json"), "--output-dir", str(tmp_path)]) == 2


def test_unwritable_output_exit_4(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert cli.main(["analyze", "--output-dir", str(blocker / "sub")]) == 4


def test_missing_well_exit_2(tmp_path):
    assert run(tmp_path, "analyze", {"n": 10000})[0] == 2
