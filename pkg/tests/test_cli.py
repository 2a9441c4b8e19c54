"""Command line surface: exit codes, stderr JSON, config layering, and one
smoke pass per subcommand."""

import json
import subprocess
import sys

import pytest

from levysel.cli import main


def run_cli(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def simulate(tmp_path, capsys, name="path.csv", n=400, seed=3):
    target = tmp_path / name
    code, _, err = run_cli(
        [
            "simulate", "--case", "i", "--h", "0.01", "--n", str(n),
            "--seed", str(seed), "--out", str(target),
        ],
        capsys,
    )
    assert code == 0, err
    return target


def test_simulate_is_byte_deterministic(tmp_path, capsys):
    a = simulate(tmp_path, capsys, "a.csv")
    b = simulate(tmp_path, capsys, "b.csv")
    assert a.read_bytes() == b.read_bytes()
    c = simulate(tmp_path, capsys, "c.csv", seed=4)
    assert a.read_bytes() != c.read_bytes()


def test_fit_round_trip(tmp_path, capsys):
    data = simulate(tmp_path, capsys, n=2000)
    code, out, _ = run_cli(
        ["fit", "--data", str(data), "--scale", "Scale2", "--drift", "Drift2"],
        capsys,
    )
    assert code == 0
    blob = json.loads(out)
    assert blob["fit"]["scale_name"] == "Scale2"
    assert abs(blob["fit"]["gamma_hat"][0] - 3.0) < 1.0
    assert blob["confidence"]["level"] == 0.95
    assert len(blob["confidence"]["lower"]) == 2


def test_fit_scale_only(tmp_path, capsys):
    data = simulate(tmp_path, capsys)
    code, out, _ = run_cli(
        ["fit", "--data", str(data), "--scale", "Scale2", "--drift", "none"], capsys
    )
    assert code == 0
    blob = json.loads(out)
    assert blob["fit"]["drift_name"] is None
    assert "confidence" not in blob


def test_bad_data_exit_code_and_stderr_json(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("not,a,header\n1,2,3\n")
    code, out, err = run_cli(["fit", "--data", str(bad), "--scale", "Scale1"], capsys)
    assert code == 2
    assert out == ""
    payload = json.loads(err)
    assert payload["exit_code"] == 2
    assert payload["error"] == "DataError"


def test_usage_errors_exit_one(tmp_path, capsys):
    code, _, err = run_cli(["fit", "--scale", "Scale1"], capsys)  # no --data
    assert code == 1
    assert json.loads(err)["exit_code"] == 1

    data = simulate(tmp_path, capsys)
    code, _, err = run_cli(["fit", "--data", str(data), "--scale", "Scale9"], capsys)
    assert code == 1
    assert "Scale9" in json.loads(err)["message"]


def test_simulate_needs_exactly_one_horizon(capsys):
    code, _, err = run_cli(["simulate", "--case", "i", "--h", "0.01"], capsys)
    assert code == 1
    code, _, err = run_cli(
        ["simulate", "--case", "i", "--h", "0.01", "--n", "10", "--t", "1.0"], capsys
    )
    assert code == 1


def test_config_file_layering(tmp_path, capsys):
    """Config supplies defaults, CLI flags win, section beats top level."""
    data = simulate(tmp_path, capsys, n=600)
    cfg = tmp_path / "cfg.toml"
    cfg.write_text(
        f'data = "{data}"\nscale = "Scale1"\n\n[fit]\nscale = "Scale2"\ndrift = "none"\n'
    )
    code, out, _ = run_cli(["fit", "--config", str(cfg)], capsys)
    assert code == 0
    assert json.loads(out)["fit"]["scale_name"] == "Scale2"

    code, out, _ = run_cli(["fit", "--config", str(cfg), "--scale", "Scale1"], capsys)
    assert code == 0
    assert json.loads(out)["fit"]["scale_name"] == "Scale1"

    unknown = tmp_path / "bad.toml"
    unknown.write_text('[fit]\nscael = "Scale2"\n')
    code, _, err = run_cli(["fit", "--config", str(unknown), "--data", str(data)], capsys)
    assert code == 1
    assert "scael" in json.loads(err)["message"]


def test_json_config_accepted(tmp_path, capsys):
    data = simulate(tmp_path, capsys)
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"fit": {"data": str(data), "scale": "Scale2", "drift": "none"}}))
    code, out, _ = run_cli(["fit", "--config", str(cfg)], capsys)
    assert code == 0
    assert json.loads(out)["fit"]["scale_name"] == "Scale2"


def test_select_smoke(tmp_path, capsys):
    data = simulate(tmp_path, capsys, n=2000)
    code, out, _ = run_cli(
        ["select", "--data", str(data), "--criteria", "gqbic,faic"], capsys
    )
    assert code == 0
    blob = json.loads(out)["selections"]
    assert set(blob) == {"gqbic", "faic"}
    assert blob["gqbic"]["n_evaluations"] == 7


def test_criteria_smoke(tmp_path, capsys):
    data = simulate(tmp_path, capsys, n=1000)
    code, out, _ = run_cli(
        ["criteria", "--data", str(data), "--scale", "Scale2", "--drift", "Drift2"], capsys
    )
    assert code == 0
    blob = json.loads(out)
    assert set(blob["scale_criteria"]) == {
        "gqaic1", "gqaic1_scalar", "gqaic1_trunc", "gqaic1_mod",
        "gqbic1", "gqbic1_sharp", "faic1",
    }
    assert set(blob["drift_criteria"]) == {"gqaic2", "gqbic2", "faic2"}
    assert isinstance(blob["scale_criteria"]["gqaic1_trunc"]["truncation_fired"], bool)
    # the BIC penalty dominates the flat AIC one on this design
    sc = blob["scale_criteria"]
    assert sc["gqbic1"]["value"] > sc["faic1"]["value"]


def test_mc_smoke_with_compare_and_csv(tmp_path, capsys):
    stem = tmp_path / "counts.csv"
    code, out, _ = run_cli(
        [
            "mc", "--case", "i", "--h", "0.01", "--t", "10", "--reps", "3",
            "--criteria", "gqbic", "--seed", "99", "--compare",
            "--out", str(stem),
        ],
        capsys,
    )
    assert code == 0
    blob = json.loads(out)
    assert stem.exists()
    assert blob["blocks"][0]["replications"] == 3
    comp = blob["comparisons"][0]
    assert comp["criterion"] == "gqbic" and comp["t_n"] == 10.0
    assert "max_abs_z" in comp and "ok" in comp


def test_mc_compare_requires_tabulated_case(capsys):
    code, _, err = run_cli(
        ["mc", "--case", "gaussian", "--h", "0.01", "--t", "10", "--reps", "2", "--compare"],
        capsys,
    )
    assert code == 1
    assert "gaussian" in json.loads(err)["message"]


def test_limit_prob_smoke(capsys):
    code, out, _ = run_cli(
        [
            "limit-prob", "--kind", "drift", "--small", "Drift2", "--large", "Drift3",
            "--scale", "Scale2", "--case", "i", "--h", "0.01", "--t", "30",
            "--seed", "5", "--n-mc", "20000",
        ],
        capsys,
    )
    assert code == 0
    blob = json.loads(out)["result"]
    assert blob["threshold"] == 2.0
    assert 0.10 < blob["prob"] < 0.25
    assert len(blob["lambdas"]) == 2


def test_console_script_help():
    proc = subprocess.run(
        [sys.executable, "-m", "levysel.cli", "--help"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    for cmd in ("simulate", "fit", "criteria", "select", "mc", "limit-prob"):
        assert cmd in proc.stdout
