"""
Command-line tests driven through typer's CliRunner.
"""
import json
import os

import pandas as pd
import pytest
from typer.testing import CliRunner

from beamsynth import pipeline
from beamsynth.cli import EXIT_CASE_FAILURE, EXIT_CONFIG_ERROR, app

SMALL_RUN_TOML = """\
budget_seconds = 60.0
n_antennas = 8
refine_m = 3
classical_restarts = 1
candidate_cap = 16
enabled_kinds = ["BSB", "LQA", "CAC"]

[objective]
sample_step = 5.0

[phase_solver]
batch_size = 8
iterations = 120

[amplitude_solver]
batch_size = 4
iterations = 60

[adam]
iterations = 40
"""

runner = CliRunner()


@pytest.fixture
def workdir(monkeypatch, tmp_path):
    monkeypatch.chdir(tmp_path)
    for name in list(os.environ):
        if name.startswith("BEAM_"):
            monkeypatch.delenv(name)
    (tmp_path / "run.toml").write_text(SMALL_RUN_TOML, encoding="utf-8")
    return tmp_path


def invoke(*args):
    return runner.invoke(app, [str(arg) for arg in args])


class TestGenCases:
    def test_writes_cases(self, workdir):
        result = invoke("gen-cases", "--n", 3, "--seed", 4, "--out", workdir / "cases.json")
        assert result.exit_code == 0
        cases = json.loads((workdir / "cases.json").read_text())
        assert [case["case_id"] for case in cases] == ["case-0000", "case-0001", "case-0002"]


class TestCodegen:
    def test_tables(self, workdir):
        result = invoke("codegen", "--bits", 3, "--amp-bits", 2, "--out", workdir / "coeffs.json")
        assert result.exit_code == 0
        payload = json.loads((workdir / "coeffs.json").read_text())
        assert payload["phase"]["spins_per_antenna"] == 4
        assert len(payload["phase"]["allowed_grid"]) == 8
        assert payload["amplitude"]["coefficients"] == [0.25, 0.125]

    def test_bad_bits(self, workdir):
        result = invoke("codegen", "--bits", 7, "--out", workdir / "coeffs.json")
        assert result.exit_code == EXIT_CONFIG_ERROR


class TestSolveScorePattern:
    def test_full_flow(self, workdir):
        assert invoke("gen-cases", "--n", 2, "--seed", 1, "--out", workdir / "cases.json").exit_code == 0

        result = invoke(
            "solve", "--cases", workdir / "cases.json", "--config", workdir / "run.toml", "--out", workdir / "results"
        )
        assert result.exit_code == 0, result.output
        files = sorted((workdir / "results").glob("*.json"))
        assert [path.stem for path in files] == ["case-0000", "case-0001"]

        result = invoke("score", "--results", workdir / "results", "--out", workdir / "summary.json")
        assert result.exit_code == 0
        summary = json.loads((workdir / "summary.json").read_text())
        assert set(summary["cases"]) == {"case-0000", "case-0001"}
        assert summary["total"] == pytest.approx(2 * summary["mean"])

        result = invoke("pattern", "--result", files[0], "--out", workdir / "pattern.csv", "--step", 1.0)
        assert result.exit_code == 0
        frame = pd.read_csv(workdir / "pattern.csv")
        assert list(frame.columns) == ["theta_deg", "power_db"]
        assert len(frame) == 181

    def test_single_case(self, workdir):
        invoke("gen-cases", "--n", 3, "--seed", 2, "--out", workdir / "cases.json")
        result = invoke(
            "solve",
            "--cases", workdir / "cases.json",
            "--case-id", "case-0001",
            "--config", workdir / "run.toml",
            "--out", workdir / "results",
        )
        assert result.exit_code == 0, result.output
        assert [path.name for path in (workdir / "results").glob("*.json")] == ["case-0001.json"]


class TestErrors:
    def test_missing_config(self, workdir):
        invoke("gen-cases", "--n", 1, "--out", workdir / "cases.json")
        result = invoke(
            "solve", "--cases", workdir / "cases.json", "--config", workdir / "absent.toml", "--out", workdir / "r"
        )
        assert result.exit_code == EXIT_CONFIG_ERROR

    def test_unknown_case_id(self, workdir):
        invoke("gen-cases", "--n", 1, "--out", workdir / "cases.json")
        result = invoke(
            "solve",
            "--cases", workdir / "cases.json",
            "--case-id", "nope",
            "--config", workdir / "run.toml",
            "--out", workdir / "r",
        )
        assert result.exit_code == EXIT_CONFIG_ERROR

    def test_malformed_cases(self, workdir):
        (workdir / "cases.json").write_text('[{"case_id": "x", "theta0": 10, "bits": 2}]')
        result = invoke("solve", "--cases", workdir / "cases.json", "--out", workdir / "r")
        assert result.exit_code == EXIT_CONFIG_ERROR

    def test_score_empty_directory(self, workdir):
        (workdir / "empty").mkdir()
        result = invoke("score", "--results", workdir / "empty", "--out", workdir / "summary.json")
        assert result.exit_code == EXIT_CONFIG_ERROR

    def test_unknown_variant(self, workdir):
        invoke("gen-cases", "--n", 1, "--out", workdir / "cases.json")
        result = invoke("ablate", "--cases", workdir / "cases.json", "--out", workdir / "a.csv", "--variants", "magic")
        assert result.exit_code == EXIT_CONFIG_ERROR

    def test_failed_case_exits_with_case_failure(self, workdir, monkeypatch):
        real_run_case = pipeline.run_case

        def flaky(case, config, pool=None):
            if case.case_id == "case-0001":
                raise RuntimeError("solver exploded")
            return real_run_case(case, config, pool)

        monkeypatch.setattr(pipeline, "run_case", flaky)
        invoke("gen-cases", "--n", 2, "--seed", 3, "--out", workdir / "cases.json")
        result = invoke(
            "solve", "--cases", workdir / "cases.json", "--config", workdir / "run.toml", "--out", workdir / "r"
        )
        assert result.exit_code == EXIT_CASE_FAILURE
        failed = json.loads((workdir / "r" / "case-0001.json").read_text())
        assert failed["breakdown"]["y"] == 0.0
        assert failed["branch_provenance"] == "failure"
        assert failed["error"] == "solver exploded"
        assert (workdir / "r" / "case-0000.json").exists()


class TestAblate:
    def test_summary_and_per_case(self, workdir):
        invoke("gen-cases", "--n", 2, "--seed", 5, "--out", workdir / "cases.json")
        result = invoke(
            "ablate",
            "--cases", workdir / "cases.json",
            "--config", workdir / "run.toml",
            "--variants", "quantum-only,classical-only",
            "--out", workdir / "ablation.csv",
            "--per-case-out", workdir / "ablation_cases.csv",
        )
        assert result.exit_code == 0, result.output
        summary = pd.read_csv(workdir / "ablation.csv")
        assert list(summary["variant"]) == ["quantum-only", "classical-only"]
        per_case = pd.read_csv(workdir / "ablation_cases.csv")
        assert len(per_case) == 4
        assert set(per_case["case_id"]) == {"case-0000", "case-0001"}
