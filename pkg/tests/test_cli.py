import json

import numpy as np
import pytest

from forcebench.cli import main
from forcebench.fileio import (
    read_cycle_log_csv,
    read_load_curve_csv,
    write_load_curve_csv,
)


def run_cli(*argv):
    return main(list(argv))


def read_dir_bytes(path):
    return {p.name: p.read_bytes() for p in sorted(path.iterdir())}


# -------------------------------------------------------------- simulate-static

def test_simulate_static_writes_fleet_and_manifest(tmp_path):
    out = tmp_path / "fleet"
    assert run_cli("simulate-static", "--seed", "1", "--fleet", "2",
                   "--out", str(out)) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 1
    assert manifest["files"] == ["specimen_000.csv", "specimen_001.csv"]
    assert all((out / name).exists() for name in manifest["files"])


def test_simulate_static_rerun_is_byte_identical(tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    run_cli("simulate-static", "--seed", "7", "--fleet", "2", "--out", str(out_a))
    run_cli("simulate-static", "--seed", "7", "--fleet", "2", "--out", str(out_b))
    assert read_dir_bytes(out_a) == read_dir_bytes(out_b)


def test_simulate_static_requires_seed(tmp_path):
    assert run_cli("simulate-static", "--out", str(tmp_path / "x")) == 2


def test_simulate_static_rejects_overlong_ramp(tmp_path, capsys):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"dz_max_um": 300.0}))
    code = run_cli("simulate-static", "--seed", "1", "--fleet", "2",
                   "--config", str(config), "--out", str(tmp_path / "x"))
    assert code == 2
    assert "300" in capsys.readouterr().err


def test_config_file_with_flag_override(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"seed": 3, "fleet": 4}))
    out = tmp_path / "fleet"
    assert run_cli("simulate-static", "--fleet", "2", "--config", str(config),
                   "--out", str(out)) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 3
    assert manifest["fleet"] == 2  # flag wins over config file


def test_unknown_config_key_rejected(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"sample_rate": 10}))
    assert run_cli("simulate-static", "--seed", "1", "--config", str(config),
                   "--out", str(tmp_path / "x")) == 2


# ------------------------------------------------------------------- analyze

@pytest.fixture(scope="module")
def fleet_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("fleet20")
    assert run_cli("simulate-static", "--seed", "14", "--fleet", "20",
                   "--out", str(out)) == 0
    return out


def test_analyze_reproduces_budget(fleet_dir, tmp_path):
    out = tmp_path / "analysis"
    assert run_cli("analyze", str(fleet_dir), "--out", str(out)) == 0
    payload = json.loads((out / "analysis.json").read_text())
    ten_ppm = next(
        row for row in payload["budget"] if row["probability_ppm"] == 10.0
    )
    assert abs(ten_ppm["f_max_N"] - 0.42) < 0.05
    assert payload["n_curves"] == 20
    assert payload["weibull"]["f0_n"] > 0
    assert "overload" in payload


def test_analyze_duplicated_curve_zero_spread(fleet_dir, tmp_path):
    curve = read_load_curve_csv(fleet_dir / "specimen_000.csv", "front")
    triple = tmp_path / "triple"
    triple.mkdir()
    for i in range(3):
        write_load_curve_csv(triple / f"copy_{i}.csv", curve)
    out = tmp_path / "analysis"
    assert run_cli("analyze", str(triple), "--side", "front", "--out", str(out)) == 0
    payload = json.loads((out / "analysis.json").read_text())
    assert payload["fracture_force_std_n"] == pytest.approx(0.0, abs=1e-9)
    assert payload["weibull"] is None


def test_analyze_rejects_non_monotone_curve(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text(
        "index,dz_um,force_N,voffA_mV,voffB_mV,voffC_mV,voffD_mV,valid\n"
        "0,0.0,0.0,0,0,0,0,1\n"
        "1,2.0,0.01,0,0,0,0,1\n"
        "2,1.0,0.02,0,0,0,0,1\n"
    )
    code = run_cli("analyze", str(bad), str(bad), str(bad))
    assert code == 2
    err = capsys.readouterr().err
    assert "bad.csv" in err and ":4" in err


def test_analyze_rejects_malformed_csv(tmp_path, capsys):
    bad = tmp_path / "mangled.csv"
    bad.write_text(
        "index,dz_um,force_N,voffA_mV,voffB_mV,voffC_mV,voffD_mV,valid\n"
        "0,0.0,zero,0,0,0,0,1\n"
    )
    assert run_cli("analyze", str(bad), str(bad), str(bad)) == 2
    err = capsys.readouterr().err
    assert "mangled.csv" in err and ":2" in err


def test_analyze_needs_three_curves(fleet_dir):
    assert run_cli("analyze", str(fleet_dir / "specimen_000.csv")) == 2


def test_curve_csv_schema(fleet_dir):
    text = (fleet_dir / "specimen_000.csv").read_text()
    lines = text.splitlines()
    assert lines[0] == "index,dz_um,force_N,voffA_mV,voffB_mV,voffC_mV,voffD_mV,valid"
    assert "," in lines[1] and ";" not in text
    # forces carry at least 9 significant digits (here: 10)
    force_field = lines[120].split(",")[2]
    digits = force_field.replace("-", "").replace(".", "").replace("e", "").lstrip("0")
    assert len(digits) >= 9


def test_cycle_csv_schema(tmp_path):
    out = tmp_path / "dyn"
    run_cli("simulate-dynamic", "--seed", "2", "--out", str(out))
    lines = (out / "cycles.csv").read_text().splitlines()
    assert lines[0] == "cycle,force_N,voffA_mV,voffB_mV,voffC_mV,voffD_mV"
    assert lines[1].split(",")[0] == "500"
    assert len(lines) == 1 + 100


def test_analyze_without_out_prints_json(fleet_dir, capsys):
    assert run_cli("analyze", str(fleet_dir)) == 0
    out = capsys.readouterr().out
    payload = json.loads(out[out.index("\n{") + 1:])
    assert payload["n_curves"] == 20


def test_curve_csv_round_trip(fleet_dir, tmp_path):
    curve = read_load_curve_csv(fleet_dir / "specimen_003.csv", "front")
    copy_path = tmp_path / "copy.csv"
    write_load_curve_csv(copy_path, curve)
    again = read_load_curve_csv(copy_path, "front")
    assert np.array_equal(curve.dz_um, again.dz_um)
    assert np.array_equal(curve.force_n, again.force_n)
    assert np.array_equal(curve.voff_mv, again.voff_mv, equal_nan=True)
    assert np.array_equal(curve.valid, again.valid)


# ---------------------------------------------------------------- fit-weibull

def test_fit_weibull_invert_with_params(capsys):
    assert run_cli("fit-weibull", "--params", "1.22,10.69",
                   "--invert", "1e-6,1e-5,1e-4") == 0
    payload = json.loads(capsys.readouterr().out)
    rounded = [round(row["f_max_N"], 2) for row in payload["inversions"]]
    assert rounded == [0.34, 0.42, 0.52]


def test_fit_weibull_recovers_exact_points(tmp_path, capsys):
    from forcebench import median_ranks

    p = median_ranks(3)
    forces = 1.0 * (-np.log1p(-p)) ** (1 / 2.0)
    data = tmp_path / "forces.csv"
    data.write_text("force_N\n" + "\n".join(repr(float(v)) for v in forces) + "\n")
    assert run_cli("fit-weibull", str(data)) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["fit"]["f0_n"] == pytest.approx(1.0, rel=1e-9)
    assert payload["fit"]["beta"] == pytest.approx(2.0, rel=1e-9)


def test_fit_weibull_large_sample(tmp_path, capsys):
    rng = np.random.default_rng(40)
    data = tmp_path / "forces.csv"
    data.write_text("\n".join(str(v) for v in 1.22 * rng.weibull(10.69, 10_000)))
    assert run_cli("fit-weibull", str(data)) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["fit"]["f0_n"] == pytest.approx(1.22, rel=0.01)


def test_fit_weibull_rejects_empty(tmp_path):
    data = tmp_path / "empty.csv"
    data.write_text("force_N\n")
    assert run_cli("fit-weibull", str(data)) == 2


def test_fit_weibull_rejects_nonpositive(tmp_path):
    data = tmp_path / "nonpositive.csv"
    data.write_text("1.0\n-2.0\n1.5\n")
    assert run_cli("fit-weibull", str(data)) == 2


# ---------------------------------------------------- simulate-dynamic + verdict

def test_dynamic_chain_means_and_verdict(tmp_path, capsys):
    out = tmp_path / "dyn"
    assert run_cli("simulate-dynamic", "--seed", "5", "--out", str(out)) == 0
    capsys.readouterr()
    assert run_cli("degradation", str(out / "cycles.csv")) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["verdict"] == "stable"
    channels = payload["channels"]
    assert channels["force_N"]["mean"] == pytest.approx(0.5035, abs=0.001)
    expected = {"voffA_mV": -191.32, "voffB_mV": -192.33,
                "voffC_mV": -190.36, "voffD_mV": -191.73}
    for name, mean in expected.items():
        assert channels[name]["mean"] == pytest.approx(mean, abs=0.15)
        assert channels[name]["rel_std_pct"] < 0.2
    assert channels["force_N"]["rel_std_pct"] < 0.1


def test_dynamic_drift_flag_degrades(tmp_path, capsys):
    out = tmp_path / "dyn"
    assert run_cli("simulate-dynamic", "--seed", "5", "--drift", "2.0",
                   "--out", str(out)) == 0
    capsys.readouterr()
    assert run_cli("degradation", str(out / "cycles.csv")) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["verdict"] == "degraded"


def test_dynamic_too_few_records_exit_two(tmp_path):
    out = tmp_path / "dyn"
    assert run_cli("simulate-dynamic", "--seed", "5", "--cycles", "500",
                   "--out", str(out)) == 0
    assert run_cli("degradation", str(out / "cycles.csv")) == 2


def test_dynamic_rerun_byte_identical(tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    run_cli("simulate-dynamic", "--seed", "9", "--out", str(out_a))
    run_cli("simulate-dynamic", "--seed", "9", "--out", str(out_b))
    assert read_dir_bytes(out_a) == read_dir_bytes(out_b)


def test_cycle_csv_round_trip(tmp_path):
    out = tmp_path / "dyn"
    run_cli("simulate-dynamic", "--seed", "13", "--out", str(out))
    log = read_cycle_log_csv(out / "cycles.csv")
    from forcebench.fileio import write_cycle_log_csv

    copy_path = tmp_path / "copy.csv"
    write_cycle_log_csv(copy_path, log)
    assert copy_path.read_bytes() == (out / "cycles.csv").read_bytes()


def test_unwritable_output_is_io_error(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("not a directory")
    code = run_cli("simulate-dynamic", "--seed", "5",
                   "--out", str(blocker / "nested"))
    assert code == 3


# --------------------------------------------------------------------- report

def test_report_end_to_end(tmp_path):
    out = tmp_path / "report"
    assert run_cli("report", "--seed", "3", "--fleet", "10", "--out", str(out)) == 0
    payload = json.loads((out / "report.json").read_text())
    assert payload["seed"] == 3
    assert set(payload["sides"]) == {"front", "back"}
    assert payload["dynamic"]["verdict"] == "stable"
    assert payload["sides"]["front"]["weibull"]["f0_n"] > 0
    assert len(payload["config_sha256"]) == 64
    # serialized report round-trips losslessly
    assert json.loads(json.dumps(payload)) == payload


def test_report_rerun_identical(tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    run_cli("report", "--seed", "21", "--fleet", "8", "--out", str(out_a))
    run_cli("report", "--seed", "21", "--fleet", "8", "--out", str(out_b))
    assert (out_a / "report.json").read_bytes() == (out_b / "report.json").read_bytes()
