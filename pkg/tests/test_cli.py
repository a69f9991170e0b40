"""Tests of the command-line interface: config handling, formats, exit codes."""

import json
import math
import subprocess
import sys

import pytest

from bellsim.cli import ConfigError, main, resolve_config


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestConfigResolution:
    def test_defaults(self):
        config = resolve_config("chsh", {}, {})
        assert config["seed"] == 12345
        assert config["events_per_setting"] == 2000
        assert config["format"] == "json"

    def test_file_overrides_defaults_and_flags_override_file(self):
        config = resolve_config(
            "chsh", {"seed": 7, "events_per_setting": 100}, {"seed": 9}
        )
        assert config["seed"] == 9
        assert config["events_per_setting"] == 100

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown"):
            resolve_config("chsh", {"events": 100}, {})

    def test_type_mismatch_rejected(self):
        with pytest.raises(ConfigError, match="integer"):
            resolve_config("chsh", {"events_per_setting": "many"}, {})
        with pytest.raises(ConfigError, match="number"):
            resolve_config("bounds", {"fidelity": True}, {})

    def test_bad_format_rejected(self):
        with pytest.raises(ConfigError, match="format"):
            resolve_config("lhv", {"format": "xml"}, {})


class TestChshCommand:
    def test_fixture_recomputation(self, capsys):
        code, out, _ = run_cli(capsys, "chsh", "--table1-fixture", "--seed", "1")
        assert code == 0
        report = json.loads(out)
        values = [block["bell_value"] for block in report["results"]["experiments"]]
        assert values[0] == pytest.approx(2.203, abs=5e-4)
        assert values[1] == pytest.approx(2.218, abs=5e-4)
        assert report["seed"] == 1
        assert report["tool"] == "bellsim"

    def test_ideal_run_bell_band(self, capsys):
        code, out, _ = run_cli(
            capsys, "chsh", "--events", "100000", "--seed", "42"
        )
        assert code == 0
        report = json.loads(out)
        for block in report["results"]["experiments"]:
            assert 2.79 <= block["bell_value"] <= 2.87

    def test_csv_rendering(self, capsys):
        code, out, _ = run_cli(
            capsys, "chsh", "--table1-fixture", "--format", "csv"
        )
        assert code == 0
        lines = out.splitlines()
        assert lines[0].startswith("# tool=bellsim")
        assert "record,experiment,theta_ion_pi,theta_photon_pi,value,sigma" in lines
        assert any(line.startswith("bell,1") for line in lines)
        assert any(line.startswith("correlation,2,0.75,0.5,0.605") for line in lines)


class TestBoundsCommand:
    def test_reference_fidelity(self, capsys):
        code, out, _ = run_cli(
            capsys, "bounds", "--fidelity", "0.87", "--restarts", "8", "--seed", "3"
        )
        assert code == 0
        report = json.loads(out)
        closed = report["results"]["closed_form"]
        numeric = report["results"]["numeric"]
        assert closed["bell_min"] == pytest.approx(2.0930, abs=5e-5)
        assert closed["bell_max"] == pytest.approx(2.4607, abs=5e-5)
        assert abs(numeric["bell_min"] - closed["bell_min"]) <= 1e-3
        assert abs(numeric["bell_max"] - closed["bell_max"]) <= 1e-3

    def test_unit_fidelity(self, capsys):
        code, out, _ = run_cli(
            capsys, "bounds", "--fidelity", "1.0", "--restarts", "2"
        )
        assert code == 0
        report = json.loads(out)
        assert report["results"]["numeric"]["bell_min"] == pytest.approx(2.82843, abs=1e-5)
        assert report["results"]["numeric"]["bell_max"] == pytest.approx(2.82843, abs=1e-5)

    def test_out_of_regime_warns_but_computes(self, capsys):
        code, out, err = run_cli(
            capsys, "bounds", "--fidelity", "0.3", "--restarts", "4"
        )
        assert code == 0
        assert "warning" in err
        report = json.loads(out)
        assert report["results"]["numeric"]["out_of_regime"] is True
        assert report["results"]["numeric"]["bell_min"] < 0.0

    def test_missing_fidelity_is_config_error(self, capsys):
        code, _, err = run_cli(capsys, "bounds")
        assert code == 2
        assert "fidelity" in err


class TestLhvCommand:
    def test_default_report(self, capsys):
        code, out, _ = run_cli(capsys, "lhv", "--grid", "16")
        assert code == 0
        report = json.loads(out)
        assert report["results"]["max_bell"] == 2.0
        assert len(report["results"]["strategies"]) == 16
        assert report["results"]["tsirelson_scan"]["bell_value"] == pytest.approx(
            2.82843, abs=1e-5
        )

    def test_coarse_grid_stays_below_ceiling(self, capsys):
        code, out, _ = run_cli(capsys, "lhv", "--grid", "8")
        assert code == 0
        report = json.loads(out)
        assert report["results"]["tsirelson_scan"]["bell_value"] <= 2.0 * math.sqrt(2.0) + 1e-9

    def test_json_key_order_is_stable(self, capsys):
        _, out1, _ = run_cli(capsys, "lhv", "--grid", "8")
        _, out2, _ = run_cli(capsys, "lhv", "--grid", "8")
        assert out1 == out2


class TestLoopholesCommand:
    def test_default_verdict(self, capsys):
        code, out, _ = run_cli(capsys, "loopholes")
        assert code == 0
        report = json.loads(out)
        locality = report["results"]["locality"]
        assert locality["closed"] is False
        assert locality["required_separation_m"] == pytest.approx(37474.057, abs=1e-2)

    def test_faster_detection_shrinks_requirement(self, capsys):
        code, out, _ = run_cli(capsys, "loopholes", "--detection-time", "50e-6")
        assert code == 0
        report = json.loads(out)
        required = report["results"]["locality"]["required_separation_m"]
        assert required == pytest.approx(14989.62, abs=0.01)
        assert report["results"]["midpoint_distance_m"] == pytest.approx(required / 2.0)

    def test_boundary_closes(self, capsys):
        code, out, _ = run_cli(
            capsys, "loopholes", "--separation", "15000", "--detection-time", "50e-6"
        )
        assert code == 0
        report = json.loads(out)
        assert report["results"]["locality"]["closed"] is True

    def test_feasibility_grid(self, capsys):
        code, out, _ = run_cli(capsys, "loopholes", "--feasibility-grid")
        assert code == 0
        report = json.loads(out)
        grid = report["results"]["feasibility_grid"]
        assert any(
            row["detection_time_us"] == 50.0 and row["closed_at_km"]["15"] for row in grid
        )


class TestSwapCommand:
    def test_ideal_swap_report(self, capsys):
        code, out, _ = run_cli(capsys, "swap", "--trials", "100000", "--seed", "5")
        assert code == 0
        report = json.loads(out)
        results = report["results"]
        assert abs(results["success_rate"] - 0.5) < 0.005
        for outcome in ("psi_plus", "psi_minus"):
            assert results["heralded"][outcome]["fidelity_to_heralded"] >= 0.999
            assert results["heralded"][outcome]["bell_value"] == pytest.approx(
                2.0 * math.sqrt(2.0), abs=1e-9
            )
        assert results["chain"]["expected_latency_s"] == pytest.approx(0.602, abs=5e-3)

    def test_werner_inputs_degrade(self, capsys):
        code, out, _ = run_cli(
            capsys, "swap", "--trials", "1000", "--werner-p-a", "0.82667",
            "--werner-p-b", "0.82667",
        )
        assert code == 0
        report = json.loads(out)
        input_bell = 2.0 * math.sqrt(2.0) * 0.82667
        for outcome in ("psi_plus", "psi_minus"):
            assert report["results"]["heralded"][outcome]["bell_value"] <= input_bell

    def test_three_node_chain(self, capsys):
        code, out, _ = run_cli(
            capsys, "swap", "--trials", "100", "--nodes", "3",
            "--attempt-rate", "1.0", "--link-success", "0.5",
        )
        assert code == 0
        report = json.loads(out)
        assert report["results"]["chain"]["expected_latency_s"] == pytest.approx(
            2.667, abs=5e-4
        )


class TestConfigFileHandling:
    def test_config_file_drives_a_run(self, capsys, tmp_path):
        config = {"seed": 4, "events_per_setting": 500, "werner_p": 0.9}
        path = tmp_path / "run.json"
        path.write_text(json.dumps(config))
        code, out, _ = run_cli(capsys, "chsh", "--config", str(path))
        assert code == 0
        report = json.loads(out)
        assert report["seed"] == 4
        assert report["config"]["werner_p"] == 0.9

    def test_unknown_key_exits_2_without_output_file(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"event_count": 100}))
        out_path = tmp_path / "result.json"
        code, _, err = run_cli(
            capsys, "chsh", "--config", str(path), "--output", str(out_path)
        )
        assert code == 2
        assert "unknown" in err
        assert not out_path.exists()

    def test_malformed_json_exits_2(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        code, _, err = run_cli(capsys, "chsh", "--config", str(path))
        assert code == 2
        assert "JSON" in err

    def test_missing_config_file_exits_2(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "chsh", "--config", str(tmp_path / "nope.json"))
        assert code == 2

    def test_embedded_config_round_trips(self, capsys, tmp_path):
        code, out, _ = run_cli(capsys, "lhv", "--grid", "12", "--seed", "8")
        assert code == 0
        report = json.loads(out)
        path = tmp_path / "replay.json"
        path.write_text(json.dumps(report["config"]))
        code2, out2, _ = run_cli(capsys, "lhv", "--config", str(path))
        assert code2 == 0
        assert out2 == out

    def test_unknown_flag_exits_2(self, capsys):
        code, _, _ = run_cli(capsys, "chsh", "--no-such-flag")
        assert code == 2


class TestReproducibility:
    @pytest.mark.parametrize(
        "argv",
        [
            ["chsh", "--events", "200", "--seed", "11"],
            ["bounds", "--fidelity", "0.87", "--restarts", "4", "--seed", "11"],
            ["lhv", "--grid", "16", "--seed", "11"],
            ["loopholes", "--seed", "11"],
            ["swap", "--trials", "5000", "--seed", "11"],
        ],
    )
    @pytest.mark.parametrize("fmt", ["json", "csv"])
    def test_identical_seed_and_config_byte_identical(self, tmp_path, argv, fmt):
        outputs = []
        for index in range(2):
            path = tmp_path / f"out_{index}.{fmt}"
            result = subprocess.run(
                [sys.executable, "-m", "bellsim.cli", *argv, "--format", fmt,
                 "--output", str(path)],
                capture_output=True,
                text=True,
            )
            assert result.returncode == 0, result.stderr
            outputs.append(path.read_bytes())
        assert outputs[0] == outputs[1]

    def test_output_file_matches_stdout(self, capsys, tmp_path):
        code, out, _ = run_cli(capsys, "lhv", "--grid", "8")
        path = tmp_path / "f.json"
        code2 = main(["lhv", "--grid", "8", "--output", str(path)])
        assert code == code2 == 0
        assert path.read_text() == out


class TestRuntimeFailures:
    def test_unwritable_output_exits_1(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "lhv", "--grid", "8", "--output", str(tmp_path))
        assert code == 1
        assert "cannot write output" in err
