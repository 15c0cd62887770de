"""End-to-end tests of the command-line interface via subprocesses."""

import json
import subprocess
import sys

import pytest

from bb84_weakrand.cli import (
    EXIT_INFEASIBLE,
    EXIT_IO,
    EXIT_OK,
    EXIT_VALIDATION,
    main,
)
from bb84_weakrand.output import canonical_json, checksum_of


def run_cli(*args, **kwargs):
    return subprocess.run(
        [sys.executable, "-m", "bb84_weakrand", *args],
        capture_output=True,
        text=True,
        **kwargs,
    )


class TestRateCommand:
    def test_one_step_reference_point(self):
        proc = run_cli(
            "rate", "--method", "one-step", "--qber", "0.02", "--eps0", "0", "--eps1", "0.1"
        )
        assert proc.returncode == EXIT_OK
        doc = json.loads(proc.stdout)
        assert doc["result"]["rate"] == pytest.approx(0.0984, abs=5e-4)
        assert doc["manifest"]["command"] == "rate"

    def test_one_step_noiseless(self):
        proc = run_cli(
            "rate", "--method", "one-step", "--qber", "0", "--eps0", "0", "--eps1", "0"
        )
        assert json.loads(proc.stdout)["result"]["rate"] == 1.0

    def test_strong_trivial(self):
        proc = run_cli(
            "rate", "--method", "strong", "--p", "1", "--s", "1", "--f", "1", "--e", "0"
        )
        assert proc.returncode == EXIT_OK
        assert json.loads(proc.stdout)["result"]["rate"] == 1.0

    def test_two_step_runs_with_seed(self):
        proc = run_cli(
            "rate", "--method", "two-step", "--qber", "0.02", "--eps0", "0",
            "--eps1", "0.1", "--seed", "1", "--grid", "5", "--starts", "3",
            "--maxiter", "120",
        )
        assert proc.returncode == EXIT_OK
        doc = json.loads(proc.stdout)
        assert "rate" in doc["result"]["min_rate"]
        assert doc["result"]["solver_report"]["restarts"] == 3

    def test_two_step_requires_seed(self):
        proc = run_cli("rate", "--method", "two-step", "--qber", "0.02")
        assert proc.returncode == EXIT_VALIDATION
        assert "--seed" in proc.stderr

    def test_invalid_qber_exits_validation(self):
        proc = run_cli("rate", "--method", "one-step", "--qber", "0.7")
        assert proc.returncode == EXIT_VALIDATION
        assert "error:" in proc.stderr

    def test_missing_method_is_usage_error(self):
        proc = run_cli("rate", "--qber", "0.02")
        assert proc.returncode == EXIT_VALIDATION

    def test_manifest_checksum_covers_result(self):
        proc = run_cli("rate", "--method", "one-step", "--qber", "0.01")
        doc = json.loads(proc.stdout)
        assert doc["manifest"]["checksum"] == checksum_of(canonical_json(doc["result"]))

    def test_json_round_trips_byte_identically(self):
        proc = run_cli("rate", "--method", "one-step", "--qber", "0.0123")
        text = proc.stdout.rstrip("\n")
        assert canonical_json(json.loads(text)) == text

    def test_csv_format_flattens_result(self):
        proc = run_cli(
            "rate", "--method", "one-step", "--qber", "0.02", "--format", "csv"
        )
        lines = proc.stdout.strip().split("\n")
        assert lines[0] == "key,value"
        assert any(line.startswith("rate,") for line in lines)


class TestSweepCommand:
    def test_row_count_and_header(self, tmp_path):
        out = tmp_path / "sweep.csv"
        proc = run_cli(
            "sweep", "--qber", "0:0.12:0.005", "--dev", "0,0", "--method", "one-step",
            "--out", str(out),
        )
        assert proc.returncode == EXIT_OK
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "qber,eps0,eps1,method,rate,rate_clamped"
        assert len(lines) == 1 + 24

    def test_deterministic_output_and_manifest(self, tmp_path):
        out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["sweep", "--qber", "0:0.05:0.01", "--dev", "0,0.1", "--method", "one-step"]
        run_cli(*args, "--out", str(out_a))
        run_cli(*args, "--out", str(out_b))
        assert out_a.read_bytes() == out_b.read_bytes()
        manifest = json.loads((tmp_path / "a.csv.manifest.json").read_text())
        assert manifest["checksum"] == checksum_of(out_a.read_text())

    def test_json_format(self):
        proc = run_cli(
            "sweep", "--qber", "0:0.02:0.01", "--dev", "0,0", "--dev", "0.1,0",
            "--method", "one-step", "--format", "json",
        )
        doc = json.loads(proc.stdout)
        assert len(doc["result"]) == 2 * 2
        assert doc["result"][0]["method"] == "one-step"

    def test_two_step_requires_seed(self):
        proc = run_cli(
            "sweep", "--qber", "0:0.02:0.01", "--dev", "0,0", "--method", "two-step"
        )
        assert proc.returncode == EXIT_VALIDATION

    def test_bad_range_rejected(self):
        for bad in ("0:0.6:0.01", "0.1:0.05:0.01", "0:0.1:0", "nope"):
            proc = run_cli("sweep", "--qber", bad, "--dev", "0,0", "--method", "one-step")
            assert proc.returncode == EXIT_VALIDATION


class TestVerifyCommand:
    def test_one_step_passes(self):
        proc = run_cli(
            "verify", "--target", "one-step", "--eps0", "0", "--eps1", "0.1", "--grid", "7"
        )
        assert proc.returncode == EXIT_OK
        result = json.loads(proc.stdout)["result"]
        assert result["passed"] is True
        assert result["max_violation"] <= 1e-9
        assert result["tightness_gap"] <= 1e-6

    def test_cross_basis_passes(self):
        proc = run_cli("verify", "--target", "cross-basis", "--eps0", "0.1", "--grid", "7")
        assert proc.returncode == EXIT_OK
        assert json.loads(proc.stdout)["result"]["passed"] is True

    def test_perfect_randomness_gap_zero(self):
        proc = run_cli("verify", "--target", "one-step", "--grid", "5")
        result = json.loads(proc.stdout)["result"]
        assert abs(result["max_difference"]) <= 1e-12

    def test_small_grid_rejected(self):
        proc = run_cli("verify", "--target", "one-step", "--grid", "2")
        assert proc.returncode == EXIT_VALIDATION


class TestSimulateCommand:
    def test_flags_only(self):
        proc = run_cli("simulate", "--pulses", "5000", "--seed", "3")
        assert proc.returncode == EXIT_OK
        result = json.loads(proc.stdout)["result"]
        assert result["qber_estimate"] == 0.0
        assert result["sifted_count"] > 0

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "# channel with rectilinear flips\n"
            "pulses=20000\n"
            "seed=11\n"
            "q00=0.95\n"
            "q10=0.05\n"
        )
        proc = run_cli("simulate", "--config", str(cfg))
        assert proc.returncode == EXIT_OK
        result = json.loads(proc.stdout)["result"]
        assert result["qber_rec"] > 0.0
        assert result["qber_dia"] == 0.0

    def test_flag_overrides_config(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("pulses=5000\nseed=11\nq00=0.95\nq10=0.05\n")
        proc = run_cli("simulate", "--config", str(cfg), "--q10", "0", "--q00", "1")
        result = json.loads(proc.stdout)["result"]
        assert result["qber_estimate"] == 0.0

    def test_missing_seed_rejected(self):
        proc = run_cli("simulate", "--pulses", "1000")
        assert proc.returncode == EXIT_VALIDATION
        assert "seed" in proc.stderr

    def test_unknown_config_field_named(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("pulses=100\nseed=1\nbogus=3\n")
        proc = run_cli("simulate", "--config", str(cfg))
        assert proc.returncode == EXIT_VALIDATION
        assert "bogus" in proc.stderr

    def test_malformed_config_value_named(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("pulses=100\nseed=1\nq10=fast\n")
        proc = run_cli("simulate", "--config", str(cfg))
        assert proc.returncode == EXIT_VALIDATION
        assert "q10" in proc.stderr

    def test_pulse_dump(self, tmp_path):
        dump = tmp_path / "pulses.csv"
        proc = run_cli(
            "simulate", "--pulses", "200", "--seed", "5",
            "--attacker", "intercept-resend-with-hints",
            "--dump-pulses", str(dump),
        )
        assert proc.returncode == EXIT_OK
        lines = dump.read_text().strip().split("\n")
        assert lines[0] == "lambda0,lambda1,x0,x1,y,bob_bit,sifted,eve_guess"
        assert len(lines) == 1 + 200

    def test_determinism_across_runs(self):
        first = run_cli("simulate", "--pulses", "3000", "--seed", "42")
        second = run_cli("simulate", "--pulses", "3000", "--seed", "42")
        assert json.loads(first.stdout)["result"] == json.loads(second.stdout)["result"]


class TestOutputHandling:
    def test_unwritable_path_exits_io(self, tmp_path):
        proc = run_cli(
            "rate", "--method", "one-step", "--qber", "0.02",
            "--out", str(tmp_path / "missing" / "out.json"),
        )
        assert proc.returncode == EXIT_IO

    def test_out_file_has_no_trailing_newline_in_json(self, tmp_path):
        out = tmp_path / "rate.json"
        run_cli("rate", "--method", "one-step", "--qber", "0.02", "--out", str(out))
        text = out.read_text()
        assert not text.endswith("\n")
        assert canonical_json(json.loads(text)) == text

    def test_exit_code_contract(self):
        assert EXIT_OK == 0
        assert EXIT_VALIDATION == 2
        assert EXIT_INFEASIBLE == 3
        assert EXIT_IO == 4

    def test_in_process_exit_codes(self, capsys):
        assert main(["rate", "--method", "one-step", "--qber", "0.02"]) == EXIT_OK
        assert main(["rate", "--method", "one-step", "--qber", "2"]) == EXIT_VALIDATION
        capsys.readouterr()
