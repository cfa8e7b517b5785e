import json

import pytest

from riverkpp.cli import load_manifest_config, main
from riverkpp.network import two_branch, write_network_config


@pytest.fixture()
def tb31_config(tmp_path):
    path = tmp_path / "tb31.json"
    write_network_config(two_branch(3.0, 1.0), path)
    return str(path)


def test_phase_plane_outputs(tmp_path):
    out = tmp_path / "pp"
    rc = main(["phase-plane", "--mu", "0.1111111111111111", "--kind", "gamma-star",
               "--out", str(out)])
    assert rc == 0
    assert (out / "trajectory.csv").exists()
    assert (out / "psi_curve.csv").exists()
    summary = json.loads((out / "summary.json").read_text())
    assert summary["origin_type"] == "node"
    assert summary["lambda1_plus"] == pytest.approx(1.1009, abs=1e-3)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["subcommand"] == "phase-plane"


def test_phase_plane_determinism(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        assert main(["phase-plane", "--mu", "0.25", "--kind", "h", "--out", str(out)]) == 0
    assert (out1 / "psi_curve.csv").read_bytes() == (out2 / "psi_curve.csv").read_bytes()
    assert (out1 / "trajectory.csv").read_bytes() == (out2 / "trajectory.csv").read_bytes()


def test_stationary_outputs(tmp_path, tb31_config):
    out = tmp_path / "st"
    rc = main(["stationary", "--config", tb31_config, "--alpha", "0.5",
               "--out", str(out)])
    assert rc == 0
    payload = json.loads((out / "thresholds.json").read_text())
    assert payload["regime"] == "TB-iii"
    assert 0 < payload["thresholds"]["alpha0"] < 1
    first = (out / "profile.csv").read_text().splitlines()
    assert first[0] == "branch,x,value"
    # manifest round-trips to the identical resolved config
    config = load_manifest_config(out / "manifest.json")
    assert config["alpha"] == 0.5
    assert config["network"]["branches"][0]["beta"] == 3.0


def test_stationary_no_threshold_regime_is_not_an_error(tmp_path):
    cfg = tmp_path / "tbii.json"
    write_network_config(two_branch(2.5, 2.5), cfg)
    out = tmp_path / "st2"
    rc = main(["stationary", "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    payload = json.loads((out / "thresholds.json").read_text())
    assert payload["thresholds"] == {}
    assert "note" in payload


def test_classify_subcommand(tmp_path, tb31_config):
    out = tmp_path / "cl"
    assert main(["classify", "--config", tb31_config, "--out", str(out)]) == 0
    payload = json.loads((out / "prediction.json").read_text())
    assert payload["outcome"] == "BelowCapacity"
    assert payload["solution_type"] == "type-00"


def test_simulate_subcommand(tmp_path):
    cfg = tmp_path / "slow.json"
    write_network_config(two_branch(0.5, 0.5), cfg)
    out = tmp_path / "simout"
    rc = main(["simulate", "--config", str(cfg), "--T", "2.0", "--L", "60",
               "--out", str(out)])
    assert rc == 0
    rows = (out / "timeseries.csv").read_text().splitlines()
    assert rows[0].startswith("t,junction")
    assert (out / "final_profile.csv").exists()
    summary = json.loads((out / "run_summary.json").read_text())
    assert summary["final_time"] == pytest.approx(2.0)


def test_simulate_determinism(tmp_path):
    cfg = tmp_path / "net.json"
    write_network_config(two_branch(0.5, 0.5), cfg)
    outs = []
    for name in ("s1", "s2"):
        out = tmp_path / name
        assert main(["simulate", "--config", str(cfg), "--T", "1.0", "--L", "60",
                     "--out", str(out)]) == 0
        outs.append(out)
    assert (outs[0] / "timeseries.csv").read_bytes() == (outs[1] / "timeseries.csv").read_bytes()
    assert (outs[0] / "final_profile.csv").read_bytes() == (outs[1] / "final_profile.csv").read_bytes()


def test_sweep_subcommand(tmp_path):
    spec = {
        "networks": [
            {"branches": [{"orientation": "upper", "beta": b, "a": 2.0 / b},
                          {"orientation": "lower", "beta": 2.0, "a": 1.0}]}
            for b in (1.0, 2.5)
        ],
        "simulate": False,
    }
    grid_path = tmp_path / "grid.json"
    grid_path.write_text(json.dumps(spec))
    out = tmp_path / "sw"
    assert main(["sweep", "--grid", str(grid_path), "--out", str(out)]) == 0
    lines = (out / "sweep.csv").read_text().splitlines()
    assert len(lines) == 3  # header + 2 rows
    assert "predicted" in lines[0]


def test_verify_subcommand(tmp_path, tb31_config):
    out = tmp_path / "ver"
    rc = main(["verify", "--config", tb31_config, "--T", "60", "--L", "200",
               "--out", str(out)])
    report = json.loads((out / "report.json").read_text())
    assert report["pass"] is True
    assert rc == 0
    assert report["predicted"]["outcome"] == "BelowCapacity"
    assert report["junction_gap"] < 1e-2


def test_domain_error_exit_code(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"branches": [
        {"orientation": "upper", "beta": 0.0, "a": 1.0},
        {"orientation": "lower", "beta": 1.0, "a": 0.0}]}))
    rc = main(["classify", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert rc == 1


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["no-such-subcommand"])
    assert exc.value.code == 2
