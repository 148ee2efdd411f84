"""
Unit tests for beamsynth.pipeline.
"""
import itertools

import numpy as np
import pandas as pd
import pytest

from beamsynth import pipeline
from beamsynth.array_model import AngleGrid
from beamsynth.config import ObjectiveSettings, RunConfig
from beamsynth.encoding import AmpCode, build_amp_code, decode_amplitudes
from beamsynth.errors import ConfigError, DomainError
from beamsynth.ising_build import amplitude_problem
from beamsynth.pipeline import (
    ABLATION_CASE_COLUMNS,
    ABLATION_SUMMARY_COLUMNS,
    ABLATION_VARIANTS,
    PATTERN_COLUMNS,
    derive_seed,
    export_pattern,
    fallback_excitation,
    generate_cases,
    pattern_from_frame,
    run_ablation,
    run_batch,
    run_case,
    variant_config,
)
from beamsynth.schemas import CaseResult, CaseSpec, ExcitationRecord
from beamsynth.scoring import TIME_LIMIT_SECONDS, case_score, score_excitation
from beamsynth.solvers import SolverKind, brute_force

BRANCH_PREFIXES = ("quantum/", "classical", "fallback")


def on_grid(phases, bits):
    steps = np.asarray(phases) / (2 * np.pi / 2**bits)
    return np.allclose(steps, np.round(steps), atol=1e-9)


def fallback_y(case, config):
    excitation = fallback_excitation(case, config.n_antennas)
    return score_excitation(excitation, case.theta0, 0.0, AngleGrid(step=config.score_step)).y


class TestGenerateCases:
    """Tests for seeded case generation."""

    def test_deterministic(self):
        assert generate_cases(20, 5) == generate_cases(20, 5)
        assert generate_cases(20, 5) != generate_cases(20, 6)

    def test_ranges(self):
        cases = generate_cases(200, 1)
        assert [case.case_id for case in cases[:2]] == ["case-0000", "case-0001"]
        assert all(45.0 <= case.theta0 <= 134.0 for case in cases)
        assert {case.bits for case in cases} == {1, 2, 3, 4}
        assert {case.amp_opt for case in cases} == {False, True}

    def test_empty_and_negative(self):
        assert generate_cases(0, 1) == []
        with pytest.raises(DomainError):
            generate_cases(-1, 1)


class TestHelpers:
    """Tests for seeds and the fallback excitation."""

    def test_derive_seed(self):
        assert derive_seed(1, 2, 0) == derive_seed(1, 2, 0)
        assert derive_seed(1, 2, 0) != derive_seed(1, 2, 1)
        assert 0 <= derive_seed(7, 7) < 2**63

    @pytest.mark.parametrize("bits", [1, 2, 3, 4])
    def test_fallback_on_grid(self, bits):
        case = CaseSpec(case_id="c", theta0=63.2, bits=bits)
        excitation = fallback_excitation(case, 16)
        assert on_grid(excitation.phases, bits)
        np.testing.assert_array_equal(excitation.amplitudes, 1.0)


class TestRunCase:
    """Tests for single-case synthesis."""

    def test_phase_only_case(self, small_run_config):
        case = CaseSpec(case_id="c1", theta0=72.0, bits=2, amp_opt=False, seed=4)
        result = run_case(case, small_run_config)
        np.testing.assert_array_equal(result.excitation.amplitudes, 1.0)
        assert on_grid(result.excitation.phases, 2)
        assert result.y >= fallback_y(case, small_run_config)
        assert result.branch_provenance.startswith(BRANCH_PREFIXES)
        assert result.config_fingerprint == small_run_config.fingerprint()
        assert result.candidates_evaluated > 1
        assert result.elapsed_seconds < small_run_config.budget_seconds

    def test_amplitude_case(self, small_run_config):
        case = CaseSpec(case_id="c2", theta0=110.0, bits=3, amp_opt=True, seed=9)
        result = run_case(case, small_run_config)
        amplitudes = np.asarray(result.excitation.amplitudes)
        assert np.all((amplitudes >= 0) & (amplitudes <= 1))
        assert on_grid(result.excitation.phases, 3)
        assert result.y >= fallback_y(case, small_run_config)

    def test_tiny_budget_returns_fallback(self, small_run_config):
        case = CaseSpec(case_id="c3", theta0=90.0, bits=1, seed=1)
        config = small_run_config.model_copy(update={"budget_seconds": 1e-9})
        result = run_case(case, config)
        assert result.branch_provenance == "fallback"
        np.testing.assert_allclose(
            result.excitation.phases, fallback_excitation(case, config.n_antennas).phases
        )

    def test_non_positive_budget(self, small_run_config):
        case = CaseSpec(case_id="c4", theta0=90.0, bits=1)
        with pytest.raises(ConfigError):
            run_case(case, small_run_config.model_copy(update={"budget_seconds": 0.0}))

    def test_deterministic(self, small_run_config):
        case = CaseSpec(case_id="c5", theta0=58.5, bits=4, seed=2)
        first = run_case(case, small_run_config)
        second = run_case(case, small_run_config)
        assert first.excitation == second.excitation
        assert first.branch_provenance == second.branch_provenance

    def test_single_branch(self, small_run_config):
        case = CaseSpec(case_id="c6", theta0=100.0, bits=2, seed=3)
        classical = run_case(case, variant_config(small_run_config, "classical-only"))
        assert not classical.branch_provenance.startswith("quantum/")


class TestRunBatch:
    """Tests for batch running."""

    def test_empty(self, small_run_config):
        with pytest.raises(DomainError):
            run_batch([], small_run_config)

    def test_failure_is_isolated(self, small_run_config, monkeypatch):
        real_run_case = pipeline.run_case

        def flaky(case, config, pool=None):
            if case.case_id == "bad":
                raise RuntimeError("solver exploded")
            return real_run_case(case, config, pool)

        monkeypatch.setattr(pipeline, "run_case", flaky)
        cases = [
            CaseSpec(case_id="good", theta0=80.0, bits=1, seed=1),
            CaseSpec(case_id="bad", theta0=80.0, bits=1, seed=2),
        ]
        batch = run_batch(cases, small_run_config)
        good, bad = batch.results
        assert bad.y == 0.0
        assert bad.breakdown.zero_reason == "failure"
        assert bad.error == "solver exploded"
        assert good.error is None
        assert batch.mean_score == pytest.approx(good.y / 2)


class TestPatternExport:
    """Tests for pattern files."""

    @pytest.fixture
    def result(self):
        case = CaseSpec(case_id="p", theta0=75.0, bits=3)
        excitation = fallback_excitation(case, 32)
        return CaseResult(
            case_id=case.case_id,
            theta0=case.theta0,
            bits=case.bits,
            amp_opt=False,
            excitation=ExcitationRecord.from_excitation(excitation),
            breakdown=score_excitation(excitation, case.theta0),
            elapsed_seconds=0.1,
            branch_provenance="fallback",
            config_fingerprint="0" * 16,
        )

    def test_columns_and_normalization(self, result):
        frame = export_pattern(result)
        assert list(frame.columns) == PATTERN_COLUMNS
        assert len(frame) == 3601
        assert frame["power_db"].max() == pytest.approx(0.0)
        assert frame["power_db"].min() >= -300.0

    def test_csv_round_trip_scores(self, result, tmp_path):
        path = tmp_path / "pattern.csv"
        export_pattern(result).to_csv(path, index=False, float_format="%.9f")
        rebuilt = pattern_from_frame(pd.read_csv(path))
        assert case_score(rebuilt, result.theta0, 0.0).y == pytest.approx(result.y, abs=0.01)

    def test_missing_columns(self):
        with pytest.raises(DomainError):
            pattern_from_frame(pd.DataFrame({"theta_deg": [0.0, 1.0]}))


class TestAblation:
    """Tests for ablation variants."""

    def test_variant_config(self, small_run_config):
        assert variant_config(small_run_config, "hybrid") is small_run_config
        quantum_only = variant_config(small_run_config, "quantum-only")
        assert quantum_only.branches.quantum and not quantum_only.branches.classical
        single = variant_config(small_run_config, "single-CAC")
        assert single.enabled_kinds == [SolverKind.CAC]
        assert not single.branches.classical
        assert "single-NMFA" in ABLATION_VARIANTS
        with pytest.raises(DomainError):
            variant_config(small_run_config, "everything")

    @pytest.mark.parametrize("variant", ["single-XYZ", "single-", "single-bsb"])
    def test_unknown_single_kind(self, small_run_config, variant):
        with pytest.raises(DomainError, match="unknown ablation variant"):
            variant_config(small_run_config, variant)

    def test_hybrid_dominates_single_branches(self, small_run_config):
        cases = [CaseSpec(case_id="a", theta0=66.0, bits=2, seed=5)]
        ablation = run_ablation(cases, small_run_config, ["hybrid", "quantum-only", "classical-only"])
        table = ablation.summary
        assert list(table.columns) == ABLATION_SUMMARY_COLUMNS
        assert list(table["variant"]) == ["hybrid", "quantum-only", "classical-only"]
        scores = dict(zip(table["variant"], table["mean"]))
        assert scores["hybrid"] >= scores["quantum-only"]
        assert scores["hybrid"] >= scores["classical-only"]
        assert (table["cases"] == 1).all()

    def test_per_case_table(self, small_run_config):
        cases = [
            CaseSpec(case_id="a", theta0=66.0, bits=2, seed=5),
            CaseSpec(case_id="b", theta0=118.0, bits=4, amp_opt=True, seed=6),
        ]
        ablation = run_ablation(cases, small_run_config, ["quantum-only", "single-BSB"])
        per_case = ablation.per_case
        assert list(per_case.columns) == ABLATION_CASE_COLUMNS
        assert len(per_case) == 4
        assert list(per_case["case_id"]) == ["a", "b", "a", "b"]
        assert list(per_case["variant"]) == ["quantum-only"] * 2 + ["single-BSB"] * 2
        totals = per_case.groupby("variant", sort=False)["y"].sum()
        np.testing.assert_allclose(totals.to_numpy(), ablation.summary["total"].to_numpy())
        single = per_case[per_case["variant"] == "single-BSB"]
        assert all(
            provenance in ("quantum/BSB", "fallback") for provenance in single["branch_provenance"]
        )


class TestAmplitudeEncodingBaseline:
    """Geometric amplitude weights against an equal-weight baseline with the same spin count."""

    def test_geometric_code_reaches_lower_energy(self):
        n, amp_bits = 4, 3
        geometric = build_amp_code(amp_bits)
        # every spin weighs 1/8: levels {0, 1/4, 1/2, 3/4}, a subset of the geometric levels
        equal = AmpCode(amp_bits=amp_bits, coefficients=np.full(amp_bits, 1.0 / 8.0))
        for case in generate_cases(6, 21):
            objective = ObjectiveSettings(sample_step=5.0).for_target(case.theta0)
            phases = fallback_excitation(case, n).phases
            _, geometric_energy = brute_force(amplitude_problem(geometric, phases, objective, n))
            spins, equal_energy = brute_force(amplitude_problem(equal, phases, objective, n))
            assert geometric_energy <= equal_energy + 1e-9 * max(1.0, abs(equal_energy))
            levels = decode_amplitudes(equal, spins, n)
            np.testing.assert_allclose(levels * 4, np.round(levels * 4), atol=1e-12)

    def test_geometric_code_has_finer_levels(self):
        geometric = build_amp_code(3)
        equal = AmpCode(amp_bits=3, coefficients=np.full(3, 1.0 / 8.0))
        blocks = np.array(list(itertools.product([1, -1], repeat=3)))
        assert len(np.unique(np.round(decode_amplitudes(geometric, blocks, 1), 12))) == 8
        assert len(np.unique(np.round(decode_amplitudes(equal, blocks, 1), 12))) == 4


@pytest.mark.slow
class TestEndToEnd:
    """Full-size arrays on generated cases."""

    @pytest.fixture
    def config(self, monkeypatch, tmp_path):
        monkeypatch.chdir(tmp_path)
        return RunConfig(budget_seconds=60.0, seed=3)

    def test_batch(self, config):
        cases = generate_cases(4, 11)
        batch = run_batch(cases, config)
        assert len(batch.results) == 4
        for case, result in zip(cases, batch.results):
            assert result.error is None
            assert result.elapsed_seconds <= config.budget_seconds + 5.0
            assert on_grid(result.excitation.phases, case.bits)
            assert result.y >= fallback_y(case, config)
        assert batch.mean_score == pytest.approx(np.mean([result.y for result in batch.results]))

    def test_batch_is_reproducible(self, config):
        cases = generate_cases(20, 17)
        first = run_batch(cases, config)
        second = run_batch(cases, config)
        for one, two in zip(first.results, second.results):
            assert one.model_dump_json(exclude={"elapsed_seconds"}) == two.model_dump_json(
                exclude={"elapsed_seconds"}
            )
            assert one.elapsed_seconds <= config.time_limit
            assert two.elapsed_seconds <= config.time_limit


@pytest.fixture(scope="module")
def full_ablation(tmp_path_factory):
    with pytest.MonkeyPatch.context() as patch:
        patch.chdir(tmp_path_factory.mktemp("ablation"))
        config = RunConfig(budget_seconds=90.0, seed=3)
        return run_ablation(generate_cases(20, 17), config)


@pytest.mark.slow
class TestAblationOrdering:
    """Variant ordering on 20 generated cases with 32 antennas."""

    def test_hybrid_beats_single_branches(self, full_ablation):
        means = dict(zip(full_ablation.summary["variant"], full_ablation.summary["mean"]))
        assert means["hybrid"] >= means["quantum-only"]
        assert means["hybrid"] >= means["classical-only"]

    def test_hybrid_success_rate(self, full_ablation):
        summary = full_ablation.summary.set_index("variant")
        assert summary.loc["hybrid", "success_rate"] >= 0.5

    def test_rainbow_beats_every_single_kind(self, full_ablation):
        totals = dict(zip(full_ablation.summary["variant"], full_ablation.summary["total"]))
        for kind in SolverKind:
            assert totals["quantum-only"] >= totals[f"single-{kind.value}"]

    def test_every_case_within_budget(self, full_ablation):
        assert (full_ablation.per_case["elapsed_seconds"] <= TIME_LIMIT_SECONDS).all()
        assert (full_ablation.per_case["zero_reason"] != "failure").all()
