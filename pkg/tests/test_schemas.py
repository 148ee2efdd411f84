"""
Unit tests for beamsynth.schemas.
"""
import numpy as np
import pytest
from pydantic import ValidationError

from beamsynth.array_model import Excitation
from beamsynth.schemas import CaseResult, CaseSpec, ExcitationRecord, ScoreBreakdown


class TestCaseSpec:
    """Tests for case validation."""

    def test_valid(self):
        case = CaseSpec(case_id="case-0001", theta0=45.0, bits=4, amp_opt=True, seed=9)
        assert case.theta0 == 45.0

    @pytest.mark.parametrize(
        "fields",
        [
            {"theta0": 44.9},
            {"theta0": 134.5},
            {"bits": 0},
            {"bits": 5},
            {"case_id": ""},
            {"seed": -1},
        ],
    )
    def test_invalid(self, fields):
        values = {"case_id": "x", "theta0": 90.0, "bits": 2}
        values.update(fields)
        with pytest.raises(ValidationError):
            CaseSpec(**values)


class TestScoreBreakdown:
    """Tests for the zero-rule consistency check."""

    def test_zero_reason_forces_zero(self):
        with pytest.raises(ValidationError):
            ScoreBreakdown(
                theta_peak=92.0,
                pointing_error=2.0,
                theta1=88.0,
                theta2=95.0,
                W=7.0,
                penalty_a=0.0,
                penalty_b=1.0,
                penalty_c=0.0,
                y=920.0,
                zero_reason="pointing",
            )

    def test_failed(self):
        assert ScoreBreakdown.failed().y == 0.0


class TestCaseResult:
    """Tests for result-file validation."""

    def make(self, phases, amplitudes, amp_opt=False, bits=2):
        return CaseResult(
            case_id="c",
            theta0=90.0,
            bits=bits,
            amp_opt=amp_opt,
            excitation=ExcitationRecord(phases=phases, amplitudes=amplitudes),
            breakdown=ScoreBreakdown.failed(),
            elapsed_seconds=0.5,
            branch_provenance="failure",
            config_fingerprint="abc",
        )

    def test_on_grid(self):
        result = self.make([0.0, np.pi / 2, np.pi], [1.0, 1.0, 1.0])
        assert result.y == 0.0

    def test_off_grid_rejected(self):
        with pytest.raises(ValidationError):
            self.make([0.3], [1.0])

    def test_amplitudes_fixed_without_amp_opt(self):
        with pytest.raises(ValidationError):
            self.make([0.0], [0.5])
        assert self.make([0.0], [0.5], amp_opt=True).excitation.amplitudes == [0.5]

    def test_excitation_record_round_trip(self):
        excitation = Excitation(np.array([0.0, np.pi]), np.array([1.0, 0.25]))
        restored = ExcitationRecord.from_excitation(excitation).to_excitation()
        np.testing.assert_array_equal(restored.phases, excitation.phases)
        np.testing.assert_array_equal(restored.amplitudes, excitation.amplitudes)
