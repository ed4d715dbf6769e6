import numpy as np
import pytest

from lcnf_fpm.core.exceptions import ConfigurationError, GridSupportError
from lcnf_fpm.core.schemas import FpmConfig
from lcnf_fpm.fpm import (
    align_global_phase,
    band_limit,
    fpm_objective,
    fpm_reconstruct,
    initial_state,
    relative_error,
    spectrum_support_fraction,
    synthetic_na,
    upsample_factor_for,
)
from lcnf_fpm.optics import (
    IlluminationPattern,
    embed_spectrum,
    forward_fft,
    make_pupil,
    sequential_grid_pattern,
)
from lcnf_fpm.simulation import MeasurementSet, generate_phantom, resolution_target_phantom, simulate_sequential


@pytest.fixture
def patterns(fpm_system):
    return sequential_grid_pattern(fpm_system, 25, max_illum_na=0.1)


@pytest.fixture
def phantom():
    return generate_phantom(6, (32, 32), phase_range=(-0.3, 0.3), max_absorption=0.05, pitch=1.25)


@pytest.fixture
def measurements(fpm_system, patterns, phantom):
    return simulate_sequential(phantom, fpm_system, patterns, 2)


def _covered_band(state, system):
    support = make_pupil(system, state.pupil.shape, system.object_pitch_um).support().astype(np.complex128)
    covered = np.zeros(state.object_spectrum.shape, dtype=bool)
    for shift in state.shifts:
        covered |= embed_spectrum(support, state.object_spectrum.shape, (-shift[0], -shift[1])) != 0
    return covered


class TestGridSizing:

    def test_upsample_factor(self, fpm_system, patterns):
        assert synthetic_na(fpm_system, patterns) == pytest.approx(0.1 + 0.1 * np.sqrt(8) / 3)
        assert upsample_factor_for(fpm_system, patterns, (16, 16)) == 2

    def test_initial_state(self, fpm_system, measurements):
        state = initial_state(measurements, fpm_system, FpmConfig(enable_pupil_recovery=False))

        assert state.object_spectrum.shape == (32, 32)
        assert state.pupil.shape == (16, 16)
        assert state.pitch == pytest.approx(1.25)
        assert state.ratio == pytest.approx(0.25)
        assert state.shifts[0] == (0, 0)
        assert not state.darkfield.any()


class TestReconstruction:

    def test_objective_decreases_and_object_improves(self, fpm_system, measurements, phantom):
        config = FpmConfig(epochs=100, enable_pupil_recovery=False, upsample_factor=2)
        truth = forward_fft(phantom.transmittance())

        start = initial_state(measurements, fpm_system, config)
        state = fpm_reconstruct(measurements, fpm_system, config)

        covered = _covered_band(state, fpm_system)
        assert len(state.loss_history) == 101
        assert state.loss_history[0] == pytest.approx(fpm_objective(start, measurements))
        assert state.loss_history[-1] < state.loss_history[0]
        assert relative_error(state.object_spectrum, truth, covered) < relative_error(
            start.object_spectrum, truth, covered
        )

    @pytest.mark.slow
    def test_recovers_band_limited_object_with_steady_descent(self, fpm_system, phantom):
        # 5x5 lattice whose corner LEDs sit on the 0.1 NA rim
        spacing = 0.1 / (2 * np.sqrt(2)) * (1 - 1e-6)
        square = sequential_grid_pattern(fpm_system, 25, max_illum_na=0.1, spacing_na=spacing)
        measurements = simulate_sequential(phantom, fpm_system, square, 2)
        config = FpmConfig(epochs=300, enable_pupil_recovery=False, upsample_factor=2)
        truth = forward_fft(phantom.transmittance())

        state = fpm_reconstruct(measurements, fpm_system, config)

        covered = _covered_band(state, fpm_system)
        assert synthetic_na(fpm_system, square) == pytest.approx(2 * fpm_system.objective_na, rel=1e-5)
        assert relative_error(state.object_spectrum, truth, covered) < 0.05
        steps = np.diff(state.loss_history)
        assert np.mean(steps <= 1e-9 * state.loss_history[0]) >= 0.9

    def test_pupil_stays_inside_support(self, fpm_system, measurements):
        state = fpm_reconstruct(measurements, fpm_system, FpmConfig(epochs=3))

        assert not state.pupil[~state.pupil_support].any()
        assert np.isfinite(state.loss_history).all()

    def test_multiplexed_patterns_are_rejected(self, fpm_system, patterns):
        pair = IlluminationPattern.from_leds(
            np.concatenate([patterns[0].leds, patterns[1].leds]), fpm_system, "pair", max_illum_na=0.1
        )
        measurements = MeasurementSet(images=[np.ones((16, 16))], patterns=[pair], system=fpm_system)

        with pytest.raises(ConfigurationError):
            fpm_reconstruct(measurements, fpm_system, FpmConfig(epochs=1))

    def test_grid_too_small_for_led_windows(self, fpm_system, measurements):
        with pytest.raises(GridSupportError) as e:
            initial_state(measurements, fpm_system, FpmConfig(upsample_factor=1))

        assert e.value.details["upsample_factor"] == 1

    @pytest.mark.slow
    def test_bar_target_gains_spectrum_beyond_the_objective(self, fpm_system, patterns):
        bars = resolution_target_phantom((32, 32), period=4, phase_step=0.5, pitch=1.25)
        measurements = simulate_sequential(bars, fpm_system, patterns, 2)

        state = fpm_reconstruct(measurements, fpm_system, FpmConfig(epochs=200))

        assert state.loss_history[-1] < state.loss_history[0]
        assert spectrum_support_fraction(state, fpm_system, synthetic_na(fpm_system, patterns)) > 0


class TestAnalysis:

    def test_global_phase_is_ignored(self, rng):
        reference = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))

        assert relative_error(reference * np.exp(0.7j), reference) == pytest.approx(0.0, abs=1e-12)
        assert np.allclose(align_global_phase(reference * np.exp(-1.1j), reference), reference)

    def test_relative_error_of_zero_estimate(self, rng):
        reference = rng.normal(size=(4, 4)).astype(np.complex128)

        assert relative_error(np.zeros((4, 4)), reference) == pytest.approx(1.0)

    def test_band_limit_removes_high_frequencies(self):
        cols = np.arange(16)
        data = np.broadcast_to(np.cos(np.pi * cols), (16, 16))

        assert np.allclose(band_limit(data, 1.0, 0.25), 0, atol=1e-12)
