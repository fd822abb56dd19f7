import copy
import json
import os
import subprocess
import sys

import pytest

from qpgap.cli import main
from qpgap.config import load_device_config, load_device_document
from qpgap.errors import ConfigError
from qpgap.transmon import TransmonParams, transition_frequency

DEVICES = (
    "device_1np.json",
    "device_2np.json",
    "device_1p.json",
    "device_2p.json",
    "device_3p.json",
)


def _document(configs_dir, name="device_2np.json") -> dict:
    return json.loads((configs_dir / name).read_text())


# --------------------------------------------------------------- loading


@pytest.mark.parametrize("name", DEVICES)
def test_shipped_configs_load(configs_dir, name):
    config = load_device_config(configs_dir / name)
    assert config.params.EJ > 0 and config.params.EC > 0
    assert len(config.source_hash) == 64
    assert int(config.source_hash, 16) >= 0
    assert config.seed is not None


def test_config_hash_tracks_content(configs_dir):
    doc = _document(configs_dir)
    a = load_device_document(doc, json.dumps(doc))
    changed = copy.deepcopy(doc)
    changed["seed"] = 9999
    b = load_device_document(changed, json.dumps(changed))
    assert a.source_hash != b.source_hash
    again = load_device_document(doc, json.dumps(doc))
    assert a.source_hash == again.source_hash


def test_explicit_parity_rate_is_not_flagged_computed(configs_dir):
    config = load_device_config(configs_dir / "device_2np.json")
    assert not config.gamma_parity_computed
    assert config.noise.gamma_parity_per_s == 1000.0


def test_parity_rate_computed_from_profile(configs_dir):
    doc = _document(configs_dir)
    del doc["noise"]
    config = load_device_document(doc, json.dumps(doc))
    assert config.gamma_parity_computed
    # flat-gap junction stack passes the full base rate
    assert config.noise.gamma_parity_per_s == pytest.approx(1e3, rel=1e-6)


def test_missing_file_is_a_config_error(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_device_config(tmp_path / "absent.json")


def test_json_syntax_error_carries_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "schema_version": 1,\n  "name": oops\n}\n')
    with pytest.raises(ConfigError, match="line 3"):
        load_device_config(path)


def test_schema_version_is_checked(tmp_path, configs_dir):
    doc = _document(configs_dir)
    doc["schema_version"] = 99
    path = tmp_path / "v99.json"
    path.write_text(json.dumps(doc, indent=1))
    with pytest.raises(ConfigError, match="schema_version"):
        load_device_config(path)


def test_unknown_top_level_key_is_named(tmp_path, configs_dir):
    doc = _document(configs_dir)
    doc["frobnicator"] = 1
    path = tmp_path / "unknown.json"
    path.write_text(json.dumps(doc, indent=1))
    with pytest.raises(ConfigError, match="frobnicator"):
        load_device_config(path)


def test_transmon_requires_one_parameterization(configs_dir):
    doc = _document(configs_dir)
    doc["transmon"]["targets"] = {
        "f_ge_ng0_GHz": 4.402, "f_ge_ng05_GHz": 4.380
    }
    with pytest.raises(ConfigError, match="targets"):
        load_device_document(doc, json.dumps(doc))
    bare = _document(configs_dir)
    bare["transmon"] = {"ng": 0.0}
    with pytest.raises(ConfigError):
        load_device_document(bare, json.dumps(bare))


def test_wrong_value_type_names_the_line(tmp_path, configs_dir):
    doc = _document(configs_dir)
    doc["transmon"]["EJ_GHz"] = "large"
    text = json.dumps(doc, indent=1)
    path = tmp_path / "typed.json"
    path.write_text(text)
    expected_line = next(
        i for i, line in enumerate(text.splitlines(), start=1)
        if "EJ_GHz" in line
    )
    with pytest.raises(ConfigError, match=f"line {expected_line}"):
        load_device_config(path)


def test_bad_gap_profile_is_a_config_error(configs_dir):
    doc = _document(configs_dir)
    doc["gap_profile"]["junction_um"] = 11.0
    with pytest.raises(ConfigError, match="junction"):
        load_device_document(doc, json.dumps(doc))


def test_targets_parameterization_resolves(configs_dir):
    config = load_device_config(configs_dir / "device_2p.json")
    assert config.params.EJ == pytest.approx(6.92, rel=0.03)
    assert config.params.EC == pytest.approx(0.429, rel=0.03)


# ------------------------------------------------------------ cli: runs


def _run(argv) -> int:
    return main([str(a) for a in argv])


def test_spectrum_stdout(configs_dir, capsys):
    code = _run(["spectrum", configs_dir / "device_2np.json"])
    out = capsys.readouterr().out
    assert code == 0
    assert "# f_ge_ng0_GHz =" in out
    assert out.startswith("kind,ng,f_ge_GHz")


def test_spectrum_files(configs_dir, tmp_path, capsys):
    code = _run([
        "spectrum", configs_dir / "device_2np.json",
        "--out", tmp_path, "--svg",
    ])
    assert code == 0
    csv_text = (tmp_path / "spectrum.csv").read_text()
    first_grid = next(
        line for line in csv_text.splitlines() if line.startswith("grid")
    )
    f_ge_ng0 = float(first_grid.split(",")[2])
    expected = transition_frequency(TransmonParams(EJ=7.417, EC=0.403))
    assert f_ge_ng0 == pytest.approx(expected, rel=1e-9)
    assert (tmp_path / "spectrum.svg").read_text().startswith("<svg")


def test_spectrum_json(configs_dir, tmp_path, capsys):
    code = _run([
        "spectrum", configs_dir / "device_2np.json",
        "--format", "json", "--out", tmp_path,
    ])
    assert code == 0
    document = json.loads((tmp_path / "spectrum.json").read_text())
    summary = document["summary"]
    assert summary["EJ_GHz"] == pytest.approx(7.417)
    assert summary["eps_ge_GHz"] == pytest.approx(0.0104, abs=0.001)
    assert summary["chi_MHz"] == pytest.approx(-1.639, abs=0.01)
    assert len(document["grid"]) == 26


def test_spectrum_near_resonance_leaves_chi_empty(configs_dir, tmp_path):
    # charge-sensitive device whose higher levels straddle the cavity
    code = _run([
        "spectrum", configs_dir / "device_3p.json",
        "--format", "json", "--out", tmp_path,
    ])
    assert code == 0
    summary = json.loads((tmp_path / "spectrum.json").read_text())["summary"]
    assert summary["chi_MHz"] is None


def test_qp_files(configs_dir, tmp_path, capsys):
    code = _run([
        "qp", configs_dir / "device_1p.json", "--out", tmp_path,
    ])
    assert code == 0
    summary = (tmp_path / "qp_summary.csv").read_text()
    assert "barrier_protected,true" in summary
    assert "trap_adequate,false" in summary
    grid = (tmp_path / "qp_grid.csv").read_text().splitlines()
    assert grid[0] == "T_K,x_qp,gamma1_per_s,T1_us,parity_rate_per_s"
    assert len(grid) == 40  # header plus 39 temperatures


def test_qp_json_summary_values(configs_dir, tmp_path):
    code = _run([
        "qp", configs_dir / "device_1p.json",
        "--format", "json", "--out", tmp_path,
    ])
    assert code == 0
    summary = json.loads((tmp_path / "qp.json").read_text())["summary"]
    assert summary["parity_rate_base_per_s"] == pytest.approx(
        3.146e-4, rel=0.01
    )
    assert summary["barrier_protected"] is True
    assert summary["barrier_left_margin"] == pytest.approx(6.0)
    assert summary["trap_adequate"] is False
    assert summary["crossover_K"] == pytest.approx(0.168, abs=0.002)


def test_parity_sim_csv_requires_out(configs_dir, capsys):
    code = _run([
        "parity-sim", configs_dir / "device_2np.json", "--duration", "2",
    ])
    captured = capsys.readouterr()
    assert code == 2
    assert "requires --out" in captured.err


def test_parity_sim_files_and_verdict(configs_dir, tmp_path, capsys):
    code = _run([
        "parity-sim", configs_dir / "device_2np.json",
        "--duration", "2", "--out", tmp_path, "--svg",
    ])
    captured = capsys.readouterr()
    assert code == 0
    assert "two-branch" in captured.out
    scan_lines = (tmp_path / "scan.csv").read_text().splitlines()
    assert scan_lines[0].startswith("time_s,f_")
    assert len(scan_lines) == 11  # header plus 10 pixels of 0.2 s
    meta = json.loads((tmp_path / "scan_meta.json").read_text())
    assert meta["estimate"]["kind"] == "upper_bound"
    assert meta["gamma_parity_per_s"] == 1000.0
    assert meta["true_switch_count"] > 1000
    peak_lines = (tmp_path / "peaks.csv").read_text().splitlines()
    assert peak_lines[0] == "pixel,time_s,count,f1_GHz,f2_GHz"
    assert len(peak_lines) == 11
    assert (tmp_path / "scan.svg").read_text().startswith("<svg")


def test_parity_sim_json_stdout(configs_dir, capsys):
    code = _run([
        "parity-sim", configs_dir / "device_3p.json",
        "--duration", "4", "--format", "json", "--seed", "203",
    ])
    captured = capsys.readouterr()
    assert code == 0
    document = json.loads(captured.out[: captured.out.rindex("}") + 1])
    assert document["peaks"][0]["count"] in (1, 2)
    assert document["config"] == "3P"


def test_fit_t1_files(configs_dir, data_dir, tmp_path, capsys):
    code = _run([
        "fit", "t1", data_dir / "t1_vs_temperature_1np.csv",
        configs_dir / "device_1np.json", "--out", tmp_path, "--svg",
    ])
    assert code == 0
    text = (tmp_path / "fit_t1.txt").read_text()
    assert "tc_K = 1.3" in text
    assert "+-" in text
    residuals = (tmp_path / "fit_t1_residuals.csv").read_text().splitlines()
    assert residuals[0] == "T_K,rate_per_s,model_per_s,residual_per_s,sigma_per_s"
    assert len(residuals) == 15
    assert (tmp_path / "fit_t1.svg").read_text().startswith("<svg")


def test_fit_t1_json_report(configs_dir, data_dir, tmp_path):
    code = _run([
        "fit", "t1", data_dir / "t1_vs_temperature_1np.csv",
        configs_dir / "device_1np.json",
        "--format", "json", "--out", tmp_path,
    ])
    assert code == 0
    report = json.loads((tmp_path / "fit_t1.json").read_text())
    assert report["params"]["tc_K"] == pytest.approx(1.31, abs=0.04)
    assert report["derived"]["x_nqp_inferred"] == pytest.approx(
        1.63e-6, rel=0.05
    )
    assert report["config_hash"]


def test_fit_t2_with_t1_data(configs_dir, data_dir, tmp_path):
    code = _run([
        "fit", "t2", data_dir / "t2star_vs_temperature_1p.csv",
        configs_dir / "device_1p.json",
        "--t1-data", data_dir / "t1_vs_temperature_1p.csv",
        "--format", "json", "--out", tmp_path,
    ])
    assert code == 0
    report = json.loads((tmp_path / "fit_t2.json").read_text())
    assert report["params"]["n0"] == pytest.approx(0.0098, abs=0.002)
    assert "pure_dephasing_from_echo_per_s" in report["derived"]


def test_fit_t2_uses_measured_t1_fallback(configs_dir, data_dir, capsys):
    code = _run([
        "fit", "t2", data_dir / "t2star_vs_temperature_1p.csv",
        configs_dir / "device_1p.json",
    ])
    assert code == 0
    assert "n0" in capsys.readouterr().out


def test_fit_t2_without_t1_source_fails(configs_dir, data_dir, tmp_path, capsys):
    doc = _document(configs_dir, "device_1p.json")
    del doc["measured"]
    path = tmp_path / "no_measured.json"
    path.write_text(json.dumps(doc))
    code = _run([
        "fit", "t2", data_dir / "t2star_vs_temperature_1p.csv", path,
    ])
    assert code == 2
    assert "T1" in capsys.readouterr().err


def test_bad_config_exits_2(configs_dir, tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    code = _run(["spectrum", path])
    captured = capsys.readouterr()
    assert code == 2
    assert captured.err.startswith("error:")


# ---------------------------------------------------------- determinism


def _run_cli(argv, out_dir, threads: str):
    env = dict(os.environ)
    env.update(
        OMP_NUM_THREADS=threads,
        OPENBLAS_NUM_THREADS=threads,
        MKL_NUM_THREADS=threads,
    )
    result = subprocess.run(
        [sys.executable, "-m", "qpgap.cli", *map(str, argv),
         "--out", str(out_dir)],
        capture_output=True, text=True, env=env,
    )
    assert result.returncode == 0, result.stderr
    return {
        path.name: path.read_bytes() for path in sorted(out_dir.iterdir())
    }


def test_outputs_identical_across_runs_and_threads(configs_dir, tmp_path):
    argv = [
        "parity-sim", configs_dir / "device_2np.json", "--duration", "2",
    ]
    first = _run_cli(argv, tmp_path / "a", "1")
    second = _run_cli(argv, tmp_path / "b", "1")
    threaded = _run_cli(argv, tmp_path / "c", "4")
    assert first == second
    assert first == threaded
    assert set(first) == {"peaks.csv", "scan.csv", "scan_meta.json"}
