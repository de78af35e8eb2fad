import json
import math

import pytest

from slimkms import cli
from slimkms.errors import InputError, OracleGateError
from slimkms.io import read_csv, read_json


def run(tmp_path, *argv):
    return cli.main(["--out", str(tmp_path), *argv])


class TestParsing:
    @pytest.mark.parametrize(
        "text,value",
        [("2pi", 2 * math.pi), ("pi/2", math.pi / 2), ("4*pi", 4 * math.pi), ("6.5", 6.5), ("inf", math.inf), ("pi", math.pi)],
    )
    def test_parse_beta(self, text, value):
        assert cli.parse_beta(text) == value

    @pytest.mark.parametrize("text", ["-1", "0", "hot", "2pie"])
    def test_parse_beta_rejects(self, text):
        with pytest.raises(InputError):
            cli.parse_beta(text)

    def test_beta_list(self):
        assert cli.parse_beta_list("2pi, pi,4pi") == [2 * math.pi, math.pi, 4 * math.pi]

    def test_run_config_validation(self):
        with pytest.raises(InputError):
            cli.RunConfig("slim", lambda_ratio=1.5)
        with pytest.raises(InputError):
            cli.RunConfig("slim", tol=0.0)


class TestSlimCommand:
    def test_degree_auto(self, tmp_path):
        assert run(tmp_path, "slim", "--dist", "pv-inverse", "--degree-auto") == cli.EXIT_OK
        rows, cfg = read_csv(tmp_path / "slim.csv")
        assert cfg["command"] == "slim" and all(r["verdict"] == "converged" for r in rows)
        assert (tmp_path / "slim.png").stat().st_size > 0
        assert (tmp_path / "slim_plotdata.csv").exists()
        assert read_json(tmp_path / "summary.json")["passed"] is True

    def test_explicit_scaling(self, tmp_path):
        assert run(tmp_path, "slim", "--dist", "lorentzian-m1", "--N", "lambda^-1") == cli.EXIT_OK

    def test_divergence_exit_code(self, tmp_path):
        assert run(tmp_path, "slim", "--dist", "delta", "--N", "lambda^-1") == cli.EXIT_FAIL
        rows, _ = read_csv(tmp_path / "slim.csv")
        assert all(r["verdict"] == "diverges" for r in rows)

    def test_unknown_distribution(self, tmp_path):
        assert run(tmp_path, "slim", "--dist", "nonsense") == cli.EXIT_USAGE

    def test_missing_distribution(self, tmp_path):
        assert run(tmp_path, "slim") == cli.EXIT_USAGE


class TestConeCommand:
    def test_wedge(self, tmp_path):
        assert run(tmp_path, "cone", "--region", "wedge4d", "--directions", "128") == cli.EXIT_OK
        s = read_json(tmp_path / "summary.json")
        assert s["regular"] and s["cone"]["axis"][1] > 0.9
        assert (tmp_path / "cone.png").exists()

    def test_cusp_fails(self, tmp_path):
        assert run(tmp_path, "cone", "--region", "cusp", "--directions", "128") == cli.EXIT_FAIL

    def test_interior_point(self, tmp_path):
        assert run(tmp_path, "cone", "--region", "ball", "--point", "interior") == cli.EXIT_OK
        assert read_json(tmp_path / "summary.json")["all_space"] is True

    def test_region_file(self, tmp_path):
        f = tmp_path / "region.json"
        f.write_text(json.dumps({"kind": "polytope", "halfspaces": [[-1, 0, 0], [0, -1, 0]]}))
        assert run(tmp_path, "cone", "--region-file", str(f), "--directions", "64") == cli.EXIT_OK

    def test_point_outside_closure(self, tmp_path):
        assert run(tmp_path, "cone", "--region", "ball", "--point", "3,3") == cli.EXIT_USAGE

    def test_bad_point_dimension(self, tmp_path):
        assert run(tmp_path, "cone", "--region", "ball", "--point", "0,0,0") == cli.EXIT_USAGE


class TestRindlerCommand:
    def test_slc_report(self, tmp_path):
        code = run(tmp_path, "rindler-verify", "--beta", "2pi,pi", "--report", "slc")
        assert code == cli.EXIT_OK
        s = read_json(tmp_path / "summary.json")
        assert [r["satisfied"] for r in s["reports"]["slc"]] == [True, False]
        assert (tmp_path / "gate.csv").exists() and (tmp_path / "slc.png").exists()

    def test_gate_failure_exit_code(self, tmp_path, monkeypatch):
        import slimkms.rindler.fields as fields

        def broken(mass, tol=1e-6):
            raise OracleGateError("forced failure")

        monkeypatch.setattr(fields, "pauli_jordan_gate", broken)
        assert run(tmp_path, "rindler-verify", "--report", "slc") == cli.EXIT_GATE

    def test_negative_mass(self, tmp_path):
        assert run(tmp_path, "rindler-verify", "--mass", "-1") == cli.EXIT_USAGE

    def test_beta_independence_needs_two(self, tmp_path):
        assert run(tmp_path, "rindler-verify", "--report", "beta-independence") == cli.EXIT_USAGE


class TestConfiguration:
    def test_config_file_and_cli_precedence(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"dist": "pv-inverse", "N": "1", "seed": 5, "tol": 1e-9, "order": 3}))
        out = tmp_path / "o"
        assert cli.main(["--config", str(cfg), "--out", str(out), "--seed", "9", "slim"]) == cli.EXIT_OK
        _, embedded = read_csv(out / "slim.csv")
        assert embedded["seed"] == 9 and embedded["tol"] == 1e-9
        assert embedded["options"]["order"] == 3 and embedded["options"]["dist"] == "pv-inverse"

    def test_environment_output_directory(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "env"))
        assert cli.main(["slim", "--dist", "delta", "--N", "1"]) == cli.EXIT_OK
        assert (tmp_path / "env" / "slim.csv").exists()

    def test_cli_beats_environment(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "env"))
        assert run(tmp_path / "flag", "slim", "--dist", "delta", "--N", "1") == cli.EXIT_OK
        assert (tmp_path / "flag" / "slim.csv").exists() and not (tmp_path / "env").exists()

    def test_bad_config_file(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("[1, 2]")
        assert cli.main(["--config", str(cfg), "slim", "--dist", "delta"]) == cli.EXIT_USAGE

    def test_console_summary_line(self, tmp_path, capsys):
        run(tmp_path, "slim", "--dist", "delta", "--N", "1")
        line = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert line == {"command": "slim", "passed": True, "out": str(tmp_path)}
