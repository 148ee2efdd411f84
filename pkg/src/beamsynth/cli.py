"""
Command-line interface: case generation, solving, scoring, pattern export,
encoding tables and ablations.

Exit codes: 0 on success, 2 on configuration or input errors, 3 when a case fails.
"""
import json
import logging
from pathlib import Path
from typing import List, Optional

import typer
from dotenv import load_dotenv
from pydantic import TypeAdapter, ValidationError

from beamsynth.array_model import SCORING_STEP_DEG, AngleGrid
from beamsynth.config import load_run_config
from beamsynth.encoding import DEFAULT_AMP_BITS, amp_code_table, phase_code_table
from beamsynth.errors import BeamError, ConfigError
from beamsynth.pipeline import ABLATION_VARIANTS, export_pattern, generate_cases, run_ablation, run_batch
from beamsynth.schemas import CaseResult, CaseSpec
from beamsynth.scoring import score_summary
from beamsynth.utils.logging import setup_logging

logger = logging.getLogger(__name__)

EXIT_CONFIG_ERROR = 2
EXIT_CASE_FAILURE = 3

app = typer.Typer(help="Hybrid beamforming synthesis for uniform linear arrays.", no_args_is_help=True)

_cases_adapter = TypeAdapter(List[CaseSpec])


def _fail(message: str, code: int) -> typer.Exit:
    logger.error(message)
    typer.echo(message, err=True)
    return typer.Exit(code=code)


def _read_cases(path: Path) -> List[CaseSpec]:
    try:
        return _cases_adapter.validate_json(path.read_text(encoding="utf-8"))
    except (OSError, ValidationError) as e:
        raise _fail(f"Cannot read cases from {path}: {str(e)}", EXIT_CONFIG_ERROR)


def _write_json(path: Path, payload: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(payload + "\n", encoding="utf-8")


@app.callback()
def main(
    log_level: str = typer.Option("INFO", envvar="BEAM_LOG_LEVEL", help="Logging level"),
) -> None:
    """Load `.env` and configure console logging."""
    load_dotenv()
    setup_logging(log_level)


@app.command("gen-cases")
def gen_cases(
    n: int = typer.Option(..., "--n", min=0, help="Number of cases"),
    seed: int = typer.Option(0, "--seed", min=0, help="Generator seed"),
    out: Path = typer.Option(..., "--out", help="Output cases.json"),
) -> None:
    """Generate seeded random cases."""
    cases = generate_cases(n, seed)
    _write_json(out, _cases_adapter.dump_json(cases, indent=2).decode("utf-8"))
    typer.echo(f"Wrote {len(cases)} cases to {out}")


@app.command()
def solve(
    cases_path: Path = typer.Option(..., "--cases", help="cases.json"),
    case_id: Optional[str] = typer.Option(None, "--case-id", help="Run only this case"),
    config_path: Optional[Path] = typer.Option(None, "--config", help="run.toml"),
    out: Path = typer.Option(..., "--out", help="Directory for per-case result JSON"),
) -> None:
    """Optimize cases and write one result file per case."""
    try:
        config = load_run_config(config_path)
    except ConfigError as e:
        raise _fail(str(e), EXIT_CONFIG_ERROR)
    setup_logging(config.log_level, config.log_format, config.log_file)

    cases = _read_cases(cases_path)
    if case_id is not None:
        cases = [case for case in cases if case.case_id == case_id]
        if not cases:
            raise _fail(f"No case with id {case_id} in {cases_path}", EXIT_CONFIG_ERROR)
    if not cases:
        raise _fail(f"No cases in {cases_path}", EXIT_CONFIG_ERROR)

    batch = run_batch(cases, config)
    out.mkdir(parents=True, exist_ok=True)
    for result in batch.results:
        _write_json(out / f"{result.case_id}.json", result.model_dump_json(indent=2))
    typer.echo(f"Mean score over {len(batch.results)} cases: {batch.mean_score:.2f}")

    failures = [result.case_id for result in batch.results if result.error is not None]
    if failures:
        raise _fail(f"Cases failed: {', '.join(failures)}", EXIT_CASE_FAILURE)


@app.command()
def score(
    results: Path = typer.Option(..., "--results", help="Directory of result JSON files"),
    out: Path = typer.Option(..., "--out", help="Output summary.json"),
) -> None:
    """Summarize result files: per-case breakdowns, mean, total, success rate."""
    files = sorted(results.glob("*.json"))
    if not files:
        raise _fail(f"No result files in {results}", EXIT_CONFIG_ERROR)
    try:
        loaded = [CaseResult.model_validate_json(path.read_text(encoding="utf-8")) for path in files]
        summary = score_summary(loaded)
    except (ValidationError, BeamError) as e:
        raise _fail(f"Cannot score {results}: {str(e)}", EXIT_CONFIG_ERROR)
    _write_json(out, summary.model_dump_json(indent=2))
    typer.echo(f"Mean {summary.mean:.2f}, total {summary.total:.2f}, success {summary.success_rate:.0%}")


@app.command()
def pattern(
    result: Path = typer.Option(..., "--result", help="One result JSON file"),
    out: Path = typer.Option(..., "--out", help="Output pattern.csv"),
    step: float = typer.Option(SCORING_STEP_DEG, "--step", help="Grid step in degrees"),
) -> None:
    """Export the radiation pattern of a result as theta_deg,power_db."""
    try:
        loaded = CaseResult.model_validate_json(result.read_text(encoding="utf-8"))
        frame = export_pattern(loaded, AngleGrid(step=step))
    except (OSError, ValidationError, BeamError) as e:
        raise _fail(f"Cannot export pattern from {result}: {str(e)}", EXIT_CONFIG_ERROR)
    out.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(out, index=False, float_format="%.9f")
    typer.echo(f"Wrote {len(frame)} rows to {out}")


@app.command()
def codegen(
    bits: int = typer.Option(..., "--bits", help="Phase bits (1-4)"),
    out: Path = typer.Option(..., "--out", help="Output coeffs.json"),
    amp_bits: int = typer.Option(DEFAULT_AMP_BITS, "--amp-bits", help="Amplitude spins per antenna"),
) -> None:
    """Write the phase and amplitude encoding tables."""
    try:
        payload = {"phase": phase_code_table(bits), "amplitude": amp_code_table(amp_bits)}
    except BeamError as e:
        raise _fail(f"Cannot build encoding tables: {str(e)}", EXIT_CONFIG_ERROR)
    _write_json(out, json.dumps(payload, indent=2))
    typer.echo(f"Wrote {bits}-bit phase code to {out}")


@app.command()
def ablate(
    cases_path: Path = typer.Option(..., "--cases", help="cases.json"),
    config_path: Optional[Path] = typer.Option(None, "--config", help="run.toml"),
    out: Path = typer.Option(..., "--out", help="Output ablation.csv"),
    variants: str = typer.Option(",".join(ABLATION_VARIANTS), "--variants", help="Comma-separated variants"),
    per_case_out: Optional[Path] = typer.Option(
        None, "--per-case-out", help="Optional CSV with one row per variant and case"
    ),
) -> None:
    """Compare hybrid, single-branch and single-solver variants on the same cases."""
    try:
        config = load_run_config(config_path)
    except ConfigError as e:
        raise _fail(str(e), EXIT_CONFIG_ERROR)
    setup_logging(config.log_level, config.log_format, config.log_file)

    cases = _read_cases(cases_path)
    selected = [variant.strip() for variant in variants.split(",") if variant.strip()]
    unknown = [variant for variant in selected if variant not in ABLATION_VARIANTS]
    if unknown or not selected or not cases:
        raise _fail(f"Nothing to ablate (unknown variants: {unknown})", EXIT_CONFIG_ERROR)

    ablation = run_ablation(cases, config, selected)
    out.parent.mkdir(parents=True, exist_ok=True)
    ablation.summary.to_csv(out, index=False, float_format="%.6f")
    if per_case_out is not None:
        per_case_out.parent.mkdir(parents=True, exist_ok=True)
        ablation.per_case.to_csv(per_case_out, index=False, float_format="%.6f")
    typer.echo(ablation.summary.to_string(index=False))


if __name__ == "__main__":
    app()
