"""Command-line entry point: reports, CSV outputs and exit codes."""

import csv
import json
import subprocess
import sys

import pytest

from warpcoorbit.cli import EXIT_CONFIG, EXIT_OK, EXIT_VERIFY, main
from warpcoorbit.transform import gaussian_signal, write_signal


def run(tmp_path, command, cfg, *extra):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / "out"
    code = main([command, "--config", str(path), "--out", str(out), *extra])
    report = json.loads((out / f"{command}.json").read_text())
    return code, report, out


class TestCoveringReport:
    def test_pass_and_outputs(self, tmp_path):
        code, rep, out = run(tmp_path, "covering-report", {"map": "ln", "d": 2, "r": 0.9, "window_radius": 3, "n_max": 2})
        assert code == EXIT_OK
        assert rep["config"]["map"] == "ln" and rep["config"]["seed"] == 0
        assert rep["report"]["neighbor_growth"]["counts"] == [1, 9, 25]
        rows = list(csv.reader((out / "measures.csv").open()))
        assert rows[0] == ["k0", "k1", "measure"] and len(rows) > 1

    def test_invalid_radius(self, tmp_path):
        code, rep, _ = run(tmp_path, "covering-report", {"map": "identity", "d": 2, "r": 0.7})
        assert code == EXIT_CONFIG and rep["status"] == "config-error"

    def test_unknown_map(self, tmp_path):
        assert run(tmp_path, "covering-report", {"map": "spline"})[0] == EXIT_CONFIG


class TestEmbedCheck:
    def test_besov_truth_row(self, tmp_path):
        cfg = {
            "d": 2,
            "space_a": {"kind": "warped", "map": "ln", "p": 2, "q": "inf", "kappa": {"type": "besov-identification", "s": 0}},
            "space_b": {"kind": "besov", "s": 0, "p": 2, "q": "inf"},
        }
        code, rep, _ = run(tmp_path, "embed-check", cfg)
        assert code == EXIT_OK and rep["report"]["relation"] == "coorbit_into_besov"

    def test_alpha_two_is_config_error(self, tmp_path):
        cfg = {"d": 1, "space_a": {"kind": "alpha_mod", "alpha": 2}, "space_b": {"kind": "besov"}}
        assert run(tmp_path, "embed-check", cfg)[0] == EXIT_CONFIG

    def test_different_maps(self, tmp_path):
        cfg = {"d": 1, "space_a": {"kind": "warped", "map": "ln"}, "space_b": {"kind": "warped", "map": "alpha:0.5"}}
        code, rep, _ = run(tmp_path, "embed-check", cfg)
        assert code == EXIT_OK and rep["report"]["relation"] == "not equal"


class TestTransformCommands:
    SIGNAL = {"generator": "gaussian", "N": 4096, "L": 64.0, "center": 3.1, "width": 0.1, "shift": 1.0}

    def test_transform_from_file(self, tmp_path):
        write_signal(tmp_path / "sig.bin", gaussian_signal(1, 4096, 64.0, center=3.1, width=0.1, shift=1.0))
        cfg = {"map": "identity", "delta": 0.125, "signal": "sig.bin", "prototype": {"preset": "bump", "half_width": 1.0}, "csv_stride": 64}
        code, rep, out = run(tmp_path, "transform", cfg)
        assert code == EXIT_OK
        assert rep["report"]["parseval"]["defect"] <= 1e-3
        assert rep["report"]["roundtrip_error"] <= 1e-2
        header = next(csv.reader((out / "coefficients.csv").open()))
        assert header == ["k", "y", "re", "im"]

    def test_empty_signal(self, tmp_path):
        code, rep, out = run(tmp_path, "transform", {"map": "identity", "signal": {"generator": "zero", "N": 64, "L": 8.0}})
        assert code == EXIT_OK
        assert rep["report"]["parseval"]["defect"] == 0.0
        assert len(list(csv.reader((out / "coefficients.csv").open()))) == 1

    def test_parseval_sweep(self, tmp_path):
        cfg = {"map": "identity", "signal": self.SIGNAL, "prototype": {"preset": "bump", "half_width": 1.0}}
        code, rep, _ = run(tmp_path, "parseval", cfg)
        assert code == EXIT_OK and rep["report"]["monotone"]

    def test_parseval_failure_exit(self, tmp_path):
        cfg = {"map": "identity", "signal": self.SIGNAL, "deltas": [0.5], "tolerance": 1e-6, "prototype": {"preset": "bump", "half_width": 1.0}}
        assert run(tmp_path, "parseval", cfg)[0] == EXIT_VERIFY

    def test_missing_signal_file(self, tmp_path):
        assert run(tmp_path, "transform", {"map": "identity", "signal": "nope.bin"})[0] == EXIT_CONFIG


class TestOtherCommands:
    def test_alpha_verify(self, tmp_path):
        assert run(tmp_path, "alpha-verify", {"alpha": 0.5})[0] == EXIT_OK
        assert run(tmp_path, "alpha-verify", {"alpha": 1.5})[0] == EXIT_CONFIG

    def test_besov_compare(self, tmp_path):
        code, rep, out = run(tmp_path, "besov-compare", {"map": "ln", "d": 2, "delta": 0.0625, "r": 0.75, "jmax": 16})
        assert code == EXIT_OK and rep["report"]["strictly_increasing"]
        assert (out / "besov_counts.csv").exists()

    def test_norm_probe_seeded(self, tmp_path):
        cfg = {"map": "identity", "n_signals": 2, "pq": [[2, 2]]}
        a = run(tmp_path, "norm-probe", cfg, "--seed", "5")[1]["report"]
        b = run(tmp_path, "norm-probe", cfg, "--seed", "5", "--threads", "2")[1]["report"]
        assert a["probes"][0]["band"] == b["probes"][0]["band"]

    def test_bad_json(self, tmp_path):
        (tmp_path / "bad.json").write_text("{not json")
        assert main(["parseval", "--config", str(tmp_path / "bad.json"), "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_module_entry_point(self, tmp_path):
        proc = subprocess.run([sys.executable, "-m", "warpcoorbit", "--help"], capture_output=True, text=True)
        assert proc.returncode == 0 and "covering-report" in proc.stdout

    def test_unknown_command(self):
        with pytest.raises(SystemExit):
            main(["frobnicate"])
