import json

import numpy as np
import pytest

from dicke_stirap import cli


def run(tmp_path, command, config=None, *extra):
    tmp_path.mkdir(parents=True, exist_ok=True)
    args = [command, "--out", str(tmp_path)]
    if config is not None:
        path = tmp_path / f"{command}.json"
        path.write_text(json.dumps(config))
        args += ["--config", str(path)]
    return cli.main(args + list(extra))


def read_csv(path):
    lines = [line for line in path.read_text().splitlines() if not line.startswith("#")]
    header = lines[0].split(",")
    data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    return header, data


def test_trace_benchmark(tmp_path):
    assert run(tmp_path, "trace") == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["final_fidelity"] == pytest.approx(0.985, abs=0.005)
    assert summary["dark_retention"] == pytest.approx(0.985, abs=0.005)
    assert summary["min_norm"] < 1.0
    assert summary["metadata"]["config"]["omega0"] == 50.0
    header, data = read_csv(tmp_path / "trace.csv")
    assert header[:2] == ["time", "norm"] and "pop_mu0_eps0" in header and header[-1] == "dark_projection"
    assert data[-1, header.index("fidelity")] == pytest.approx(summary["final_fidelity"])
    text = (tmp_path / "trace.csv").read_text()
    assert "# config_sha256:" in text and "# window:" in text and "# version:" in text


def test_trace_lossless_and_smallest(tmp_path):
    assert run(tmp_path, "trace", {"gamma": 0.0}) == 0
    assert json.loads((tmp_path / "summary.json").read_text())["final_fidelity"] > 0.99
    assert run(tmp_path, "trace", {"N": 1, "m": 1, "gamma": 0.0}) == 0
    assert json.loads((tmp_path / "summary.json").read_text())["final_fidelity"] > 0.999


def test_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(a, "trace", {"n_report": 51}) == 0
    assert run(b, "trace", {"n_report": 51}) == 0
    for name in ("trace.csv", "summary.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_delay_scan_single_point_matches_trace(tmp_path):
    cfg = {"tau_min": -0.6, "tau_max": -0.6, "n_tau": 1, "gammas": [2.0], "direction": "reverse"}
    assert run(tmp_path / "s", "delay-scan", cfg) == 0
    assert run(tmp_path / "t", "trace") == 0
    _, data = read_csv(tmp_path / "s" / "delay_scan.csv")
    trace = json.loads((tmp_path / "t" / "summary.json").read_text())
    assert data[0, 2] == pytest.approx(trace["final_fidelity"], abs=1e-8)


def test_delay_scan_threads_preserve_order(tmp_path):
    cfg = {"tau_min": -1.0, "tau_max": 1.0, "n_tau": 5, "gammas": [0.0, 2.0], "omega0": 20.0}
    assert run(tmp_path / "one", "delay-scan", cfg) == 0
    assert run(tmp_path / "two", "delay-scan", cfg, "--threads", "2") == 0
    one = (tmp_path / "one" / "delay_scan.csv").read_bytes()
    assert one == (tmp_path / "two" / "delay_scan.csv").read_bytes()
    header, data = read_csv(tmp_path / "one" / "delay_scan.csv")
    assert header == ["index", "tau", "fidelity_gamma=0", "fidelity_gamma=2"]
    np.testing.assert_array_equal(data[:, 0], np.arange(5))


def test_contour_and_budget(tmp_path):
    cfg = {"omega0_values": [20.0, 50.0], "delta_values": [0.0, 30.0]}
    assert run(tmp_path, "contour", cfg) == 0
    header, data = read_csv(tmp_path / "contour.csv")
    fid = {(o, d): f for o, d, f in data[:, 1:4]}
    # large detuning costs fidelity with decay present
    assert fid[(50.0, 30.0)] < fid[(50.0, 0.0)]
    assert fid[(50.0, 0.0)] == pytest.approx(0.9859, abs=1e-3)
    assert run(tmp_path, "contour", {**cfg, "max_points": 3}) == 2


def test_spectrum(tmp_path):
    assert run(tmp_path, "spectrum", {"n_times": 41}) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["max_pairing_residual"] < 1e-10 * 50
    assert summary["z_invariance_max_deviation"] < 1e-8
    assert summary["adiabaticity_area"] > 0
    assert run(tmp_path, "spectrum", {"N": 3, "m": 1, "n_times": 21}) == 0
    assert json.loads((tmp_path / "summary.json").read_text())["m1_closed_form_max_error"] < 1e-12


def test_oracle_check(tmp_path):
    assert run(tmp_path, "oracle-check", {"seeds": 2, "m_values": [1]}) == 0
    report = json.loads((tmp_path / "oracle_check.json").read_text())
    assert report["passed"] and set(report["checks"]) == {
        "reduction_equivalence",
        "excitation_conservation",
        "picture_agreement",
        "final_phase_pattern",
    }
    impossible = {"seeds": 1, "m_values": [1], "thresholds": {"amplitude": 0.0}}
    assert run(tmp_path, "oracle-check", impossible) == 1


def test_oracle_check_guard(tmp_path):
    assert run(tmp_path, "oracle-check", {"N": 7, "seeds": 1}) == 1


def test_estimate(tmp_path, caplog):
    assert run(tmp_path, "estimate") == 0
    rep = json.loads((tmp_path / "estimate.json").read_text())
    assert rep["min_pulse_time_us"] == pytest.approx(80, rel=0.05)
    assert rep["heating_events"] == pytest.approx(0.024, rel=0.01)
    assert rep["warning"] is None
    assert run(tmp_path, "estimate", {"physical": {"omega0_over_trap": 0.2}}) == 0
    assert json.loads((tmp_path / "estimate.json").read_text())["warning"]


def test_spatial_profile(tmp_path):
    assert run(tmp_path, "spatial-profile", {"variations": [0.0, 0.1]}) == 0
    runs = json.loads((tmp_path / "summary.json").read_text())["runs"]
    assert runs[0]["fidelity"] == pytest.approx(0.9859, abs=1e-3)
    assert runs[1]["fidelity"] > 0.98
    assert run(tmp_path, "spatial-profile", {"tau": 0.6}) == 2


def test_usage_errors(tmp_path, capsys):
    assert run(tmp_path, "trace", {"command": "contour"}) == 2
    assert run(tmp_path, "trace", {"bogus": 1}) == 2
    assert cli.main(["trace", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["nonsense"])
    assert exc.value.code == 2


def test_physics_errors_exit_one(tmp_path):
    assert run(tmp_path, "trace", {"omega0": -1.0}) == 1


def test_tol_override(tmp_path):
    assert run(tmp_path, "trace", {"n_report": 11}, "--tol", "1e-8") == 0
    assert json.loads((tmp_path / "summary.json").read_text())["metadata"]["tol"] == 1e-8
