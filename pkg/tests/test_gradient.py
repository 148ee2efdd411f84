"""
Unit tests for beamsynth.gradient.
"""
import numpy as np
import pytest

from beamsynth.array_model import Excitation, element_factor_power
from beamsynth.gradient import (
    AdamConfig,
    adam_minimize,
    amplitude_refine,
    classical_branch,
    loss_gradients,
    power_gradients,
    ratio_loss,
)
from beamsynth.ising_build import SidelobeConfig
from beamsynth.refine import BRANCH_CLASSICAL
from beamsynth.schemas import CaseSpec


def on_grid(phases, bits):
    steps = np.asarray(phases) / (2 * np.pi / 2**bits)
    return np.allclose(steps, np.round(steps), atol=1e-9)


class TestRatioLoss:
    """Tests for the sidelobe-to-mainlobe ratio."""

    def test_two_element_example(self):
        config = SidelobeConfig(theta0=90.0, explicit_samples=((60.0, 1.0),))
        assert ratio_loss(np.zeros(2), np.ones(2), config) == pytest.approx(0.7357, abs=1e-4)

    def test_no_sidelobes_is_zero(self):
        steered = Excitation.steered(70.0, 8)
        config = SidelobeConfig(theta0=70.0, main_only=True)
        assert ratio_loss(steered.phases, steered.amplitudes, config) == 0.0

    def test_zero_mainlobe_is_infinite(self):
        config = SidelobeConfig(theta0=90.0, sample_step=10.0)
        assert ratio_loss(np.zeros(4), np.zeros(4), config) == np.inf
        grad_alpha, grad_beta = loss_gradients(np.zeros(4), np.zeros(4), config)
        np.testing.assert_array_equal(grad_alpha, 0.0)
        np.testing.assert_array_equal(grad_beta, 0.0)


class TestGradients:
    """Analytic gradients against finite differences."""

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_matches_central_differences(self, seed):
        rng = np.random.default_rng(seed)
        n = 6
        config = SidelobeConfig(theta0=70.0, sample_step=10.0)
        alpha = rng.uniform(0, 2 * np.pi, n)
        beta = rng.uniform(0.2, 1.0, n)
        grad_alpha, grad_beta = loss_gradients(alpha, beta, config)

        step = 1e-6
        numeric_alpha = np.zeros(n)
        numeric_beta = np.zeros(n)
        for i in range(n):
            e = np.zeros(n)
            e[i] = step
            numeric_alpha[i] = (ratio_loss(alpha + e, beta, config) - ratio_loss(alpha - e, beta, config)) / (2 * step)
            numeric_beta[i] = (ratio_loss(alpha, beta + e, config) - ratio_loss(alpha, beta - e, config)) / (2 * step)

        scale = max(np.abs(grad_alpha).max(), np.abs(grad_beta).max())
        np.testing.assert_allclose(grad_alpha, numeric_alpha, rtol=1e-5, atol=1e-6 * scale)
        np.testing.assert_allclose(grad_beta, numeric_beta, rtol=1e-5, atol=1e-6 * scale)

    def test_aligned_amplitude_derivative(self):
        """With aligned phases every ∂P/∂β_n equals 2N·E(θ₀)."""
        n = 8
        steered = Excitation.steered(70.0, n)
        power, _, d_beta = power_gradients(steered.phases, steered.amplitudes, [70.0])
        assert power[0] == pytest.approx(n**2 * element_factor_power(70.0))
        np.testing.assert_allclose(d_beta[0], 2 * n * element_factor_power(70.0))

    def test_aligned_phase_derivative_vanishes(self):
        steered = Excitation.steered(110.0, 8)
        _, d_alpha, _ = power_gradients(steered.phases, steered.amplitudes, [110.0])
        np.testing.assert_allclose(d_alpha[0], 0.0, atol=1e-9)


class TestAdam:
    """Tests for the projected Adam optimizer."""

    @staticmethod
    def bowl(x):
        return float((x[0] - 3.0) ** 2), 2.0 * (x - 3.0)

    def test_quadratic_bowl(self):
        result = adam_minimize(np.zeros(1), self.bowl, config=AdamConfig(iterations=500))
        assert result.x[0] == pytest.approx(3.0, abs=1e-3)

    def test_bound_clamp(self):
        result = adam_minimize(np.array([0.5]), lambda x: (float(-x[0]), -np.ones(1)), bounds=(0.0, 1.0))
        assert result.x[0] == 1.0
        assert result.loss == -1.0

    def test_deterministic(self):
        first = adam_minimize(np.array([0.3, -1.0]), lambda x: (float(x @ x), 2 * x))
        second = adam_minimize(np.array([0.3, -1.0]), lambda x: (float(x @ x), 2 * x))
        np.testing.assert_array_equal(first.x, second.x)

    def test_best_seen(self):
        """An oversized step never makes the result worse than the start."""
        loss_fn = lambda x: (float(x @ x), 2 * x)  # noqa: E731
        result = adam_minimize(np.array([0.1]), loss_fn, config=AdamConfig(learning_rate=10.0, iterations=20))
        assert result.loss <= result.initial_loss
        assert loss_fn(result.x)[0] == pytest.approx(result.loss)

    def test_stops_on_non_finite_loss(self):
        result = adam_minimize(np.ones(3), lambda x: (np.inf, np.zeros(3)))
        assert result.steps == 0
        np.testing.assert_array_equal(result.x, np.ones(3))


class TestAmplitudeRefine:
    """Tests for amplitude-only refinement."""

    def test_in_box_and_not_worse(self, rng):
        config = SidelobeConfig(theta0=100.0, sample_step=5.0)
        phases = Excitation.steered(100.0, 8).phases
        start = rng.uniform(0.3, 1.0, 8)
        beta = amplitude_refine(phases, start, config, AdamConfig(iterations=100))
        assert np.all((beta >= 0) & (beta <= 1))
        assert ratio_loss(phases, beta, config) <= ratio_loss(phases, start, config)

    def test_zero_start_is_reseeded(self):
        config = SidelobeConfig(theta0=100.0, sample_step=5.0)
        phases = Excitation.steered(100.0, 6).phases
        beta = amplitude_refine(phases, np.zeros(6), config, AdamConfig(iterations=50))
        assert np.any(beta > 0)
        assert ratio_loss(phases, beta, config) <= ratio_loss(phases, np.full(6, 0.5), config)

    def test_optimum_unchanged(self):
        config = SidelobeConfig(theta0=100.0, main_only=True)
        steered = Excitation.steered(100.0, 6)
        start = np.full(6, 0.7)
        beta = amplitude_refine(steered.phases, start, config)
        np.testing.assert_allclose(beta, start, atol=1e-6)


class TestClassicalBranch:
    """Tests for random-restart gradient search."""

    @pytest.fixture
    def sidelobe_config(self):
        return SidelobeConfig(theta0=80.0, sample_step=5.0)

    def make_case(self, amp_opt=False, bits=2):
        return CaseSpec(case_id="c", theta0=80.0, bits=bits, amp_opt=amp_opt, seed=3)

    def test_zero_restarts(self, sidelobe_config):
        assert len(classical_branch(self.make_case(), sidelobe_config, n_restarts=0, n_antennas=8)) == 0

    @pytest.mark.parametrize("bits", [1, 2, 3, 4])
    def test_phase_only_candidates(self, sidelobe_config, bits):
        candidates = classical_branch(
            self.make_case(bits=bits), sidelobe_config, AdamConfig(iterations=30), n_restarts=2, n_antennas=8
        )
        assert len(candidates) == 2
        for candidate in candidates:
            assert candidate.provenance == BRANCH_CLASSICAL
            assert candidate.spins is None
            assert on_grid(candidate.phases, bits)
            np.testing.assert_array_equal(candidate.amplitudes, 1.0)
            assert candidate.energy == pytest.approx(ratio_loss(candidate.phases, candidate.amplitudes, sidelobe_config))

    def test_amplitude_candidates(self, sidelobe_config):
        candidates = classical_branch(
            self.make_case(amp_opt=True), sidelobe_config, AdamConfig(iterations=30), n_restarts=2, n_antennas=8
        )
        for candidate in candidates:
            assert on_grid(candidate.phases, 2)
            assert np.all((candidate.amplitudes >= 0) & (candidate.amplitudes <= 1))

    def test_deterministic(self, sidelobe_config):
        args = (self.make_case(), sidelobe_config, AdamConfig(iterations=20), 2, 8)
        first = classical_branch(*args)
        second = classical_branch(*args)
        np.testing.assert_array_equal(first.phase_matrix, second.phase_matrix)
