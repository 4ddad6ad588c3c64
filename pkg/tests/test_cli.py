import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from pbr_ions import cli, protocol
from pbr_ions.bounds import epsilon_threshold


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.lstrip().startswith("{") else out)


def test_envelope(capsys):
    code, doc = run(capsys, "threshold", "--seed", "42")
    assert code == 0
    assert doc["schema"] == 1
    assert doc["seed"] == 42
    assert doc["config"]["seed"] == 42
    assert doc["config"]["kappa"] == 0.01
    assert doc["version"].startswith("0.1.0")


class TestVerifyProtocol:
    def test_ideal(self, capsys):
        code, doc = run(capsys, "verify-protocol", "--kappa", "0")
        assert code == 0
        res = doc["result"]
        assert res["zero_pattern_bijection"]
        assert res["ideal_max_forbidden_probability"] < 1e-12
        assert max(res["forbidden_probabilities"]) < 1e-12
        assert res["probability_matrix"]["outcome_assignment"] == {"00": "00", "0'1": "01", "10'": "10", "1'1'": "11"}

    def test_circuits_agree(self, capsys):
        _, hcz = run(capsys, "verify-protocol", "--circuit", "hcz")
        _, ms = run(capsys, "verify-protocol", "--circuit", "ms")
        assert hcz["result"]["circuit_equivalence_tvd"] <= 1e-10
        a = np.array(hcz["result"]["probability_matrix"]["entries"])
        b = np.array(ms["result"]["probability_matrix"]["entries"])
        assert np.abs(a - b).max() <= 1e-10

    def test_crosstalk_listed(self, capsys):
        _, doc = run(capsys, "verify-protocol", "--kappa", "0.01")
        eps = doc["result"]["forbidden_probabilities"]
        assert all(e > 0 for e in eps[1:])

    def test_pattern_failure_exit_code(self, capsys, monkeypatch):
        # a measurement with no vanishing outcomes
        monkeypatch.setattr(protocol, "circuit_unitary", lambda c: protocol.hadamard())
        code, doc = run(capsys, "verify-protocol")
        assert code == cli.EXIT_PROTOCOL
        assert doc["result"]["zero_pattern_bijection"] is False


class TestThreshold:
    def test_paper_kappa(self, capsys):
        _, doc = run(capsys, "threshold", "--kappa", "0.01")
        assert doc["result"]["epsilon_threshold"] == pytest.approx(0.0183, abs=5e-4)
        assert len(doc["result"]["quantum_distances"]) == 3

    def test_no_crosstalk(self, capsys):
        _, doc = run(capsys, "threshold", "--kappa", "0")
        assert doc["result"]["epsilon_threshold"] == pytest.approx(0.02145, abs=1e-5)

    def test_large_kappa(self, capsys):
        _, doc = run(capsys, "threshold", "--kappa", "0.2")
        res = doc["result"]
        assert res["epsilon_threshold"] == pytest.approx(epsilon_threshold(0.2))
        assert res["clamped"] == (res["distance_sum"] >= 1)
        _, doc = run(capsys, "threshold", "--kappa", "0.5")
        assert doc["result"]["clamped"] and doc["result"]["epsilon_threshold"] == 0


class TestSimulate:
    def test_calibrated_default(self, capsys):
        code, doc = run(capsys, "simulate", "--seed", "3")
        assert code == 0
        assert doc["config"]["noise_p"] == pytest.approx(protocol.calibrate_noise(0.011, 0.01))
        rep = doc["result"]["epsilon_report"]
        assert rep["mean"] == pytest.approx(0.011, abs=0.002)
        assert doc["result"]["bound_report"]["violated"]

    def test_byte_identical(self, capsys):
        cli.main(["simulate", "--seed", "17"])
        first = capsys.readouterr().out
        cli.main(["simulate", "--seed", "17"])
        assert capsys.readouterr().out == first

    def test_files(self, tmp_path, capsys):
        out = tmp_path / "run.json"
        assert cli.main(["simulate", "--seed", "1", "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        rows = list(csv.DictReader(io.StringIO((tmp_path / "run.csv").read_text())))
        assert len(rows) == 16
        assert sum(int(r["forbidden"]) for r in rows) == 4
        freq = {(r["input"], r["outcome"]): float(r["frequency"]) for r in rows}
        rec = doc["result"]["records"][0]
        assert freq[("00", "11")] == rec["counts"][0] / rec["shots"]

    def test_csv_stdout(self, capsys):
        code, text = run(capsys, "simulate", "--format", "csv")
        assert code == 0
        assert text.splitlines()[0].startswith("input,outcome")

    def test_sigma_scales_with_root_shots(self, capsys):
        _, small = run(capsys, "simulate", "--shots", "10000", "--seed", "5")
        _, large = run(capsys, "simulate", "--shots", "1000000", "--seed", "5")
        a, b = small["result"]["epsilon_report"], large["result"]["epsilon_report"]
        # compare at fixed mean: rescale by the actual gaps
        ratio = (b["sigma_distance"] / (b["threshold"] - b["mean"])) / (a["sigma_distance"] / (a["threshold"] - a["mean"]))
        assert ratio == pytest.approx(10, rel=0.15)

    def test_explicit_noise(self, capsys):
        _, doc = run(capsys, "simulate", "--noise-p", "0", "--kappa", "0")
        assert doc["result"]["epsilon_report"]["eps"] == [0.0, 0.0, 0.0, 0.0]


class TestAnalyze:
    def test_paper_numbers(self, capsys):
        code, doc = run(capsys, "analyze", "--eps", "0.0188,0.0104,0.006,0.0104",
                        "--err", "0.005,0.001,0.0008,0.005", "--mean-err-override", "0.0015")
        assert code == 0
        rep = doc["result"]["epsilon_report"]
        assert rep["mean"] == pytest.approx(0.0114)
        assert rep["sigma_distance"] == pytest.approx(4.6, abs=0.05)
        assert rep["tail_probability"] < 1e-5
        assert rep["mean_err_propagated"] == pytest.approx(0.0018, abs=5e-5)

    def test_zero_eps(self, capsys):
        code, doc = run(capsys, "analyze", "--eps", "0,0,0,0", "--err", "0,0,0,0")
        assert code == 0
        rep = doc["result"]["epsilon_report"]
        assert all(e > 0 for e in rep["eps_err"])
        assert math.isfinite(rep["sigma_distance"])

    def test_vacuous(self, capsys):
        _, doc = run(capsys, "analyze", "--eps", "0.25,0.25,0.25,0.25", "--err", "0.01,0.01,0.01,0.01")
        assert doc["result"]["bound_report"]["violated"] is False

    def test_wrong_length(self, capsys):
        assert cli.main(["analyze", "--eps", "0.1,0.1", "--err", "0.1,0.1"]) == cli.EXIT_CONFIG


class TestKSModel:
    def test_angles(self, capsys):
        code, doc = run(capsys, "ksmodel", "--angles", "0,pi/2,pi", "--grid", "500000")
        assert code == 0
        rows = doc["result"]["angles"]
        assert rows[0]["D_KS"] == 0 and rows[0]["D_Q"] == pytest.approx(0, abs=1e-7)
        assert rows[1]["D_KS"] == pytest.approx(0.7071, abs=1e-3)
        assert rows[1]["D_Q"] == pytest.approx(np.sqrt(0.5))
        assert rows[2]["D_KS"] == pytest.approx(1, abs=1e-3) and rows[2]["D_Q"] == pytest.approx(1)

    @pytest.mark.parametrize("text,value", [("pi/2", np.pi / 2), ("3pi/4", 3 * np.pi / 4), ("-pi", -np.pi),
                                            ("0.5", 0.5), ("2*pi/3", 2 * np.pi / 3)])
    def test_parse_angle(self, text, value):
        assert cli.parse_angle(text) == pytest.approx(value)


class TestConfigErrors:
    @pytest.mark.parametrize("argv", [
        ["threshold", "--kappa", "0.9"],
        ["simulate", "--shots", "0"],
        ["simulate", "--noise-p", "2"],
        ["simulate", "--noise-p", "lots"],
        ["threshold", "--format", "csv"],
    ])
    def test_exit_3(self, argv, capsys):
        assert cli.main(argv) == cli.EXIT_CONFIG

    def test_argparse_errors_exit_3(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["simulate", "--circuit", "bogus"])
        assert exc.value.code == cli.EXIT_CONFIG

    def test_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# paper setting\nkappa = 0\nseed = 0x10\n")
        _, doc = run(capsys, "threshold", "--config", str(cfg))
        assert doc["config"]["kappa"] == 0 and doc["seed"] == 16
        _, doc = run(capsys, "threshold", "--config", str(cfg), "--kappa", "0.02")
        assert doc["config"]["kappa"] == 0.02

    def test_bad_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("colour = blue\n")
        assert cli.main(["threshold", "--config", str(cfg)]) == cli.EXIT_CONFIG
        assert cli.main(["threshold", "--config", str(tmp_path / "missing")]) == cli.EXIT_CONFIG


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "pbr_ions", "threshold", "--kappa", "0"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["result"]["epsilon_threshold"] == pytest.approx(0.02145, abs=1e-5)
