import numpy as np
import pytest

from lcnf_fpm.core.exceptions import ConfigurationError, ShapeMismatchError
from lcnf_fpm.dpc import dpc_from_intensities, dpc_invert, dpc_residual, dpc_solve, transfer_pairs_for
from lcnf_fpm.optics import forward_fft, inverse_fft, semicircle_and_arc_patterns
from lcnf_fpm.simulation import ObjectField, simulate_multiplexed
from tests.fixtures.builders import smooth_field


@pytest.fixture
def bf_patterns(fine_system):
    return semicircle_and_arc_patterns(fine_system)[:2]


@pytest.fixture
def pairs(fine_system, bf_patterns):
    return transfer_pairs_for(bf_patterns, fine_system, (32, 32), fine_system.object_pitch_um)


def _well_posed(pairs):
    aa = sum(np.abs(pair.h_abs) ** 2 for pair in pairs)
    pp = sum(np.abs(pair.h_ph) ** 2 for pair in pairs)
    ap = sum(np.conj(pair.h_abs) * pair.h_ph for pair in pairs)
    smallest = (aa + pp) / 2 - np.sqrt(((aa - pp) / 2) ** 2 + np.abs(ap) ** 2)
    return smallest > 0.25 * smallest.max()


def _masked_error(estimate, reference, mask):
    return np.linalg.norm(estimate[mask] - reference[mask]) / np.linalg.norm(reference[mask])


class TestDpcSolve:

    def test_inverts_the_linear_model(self, pairs):
        absorption = forward_fft(0.05 * smooth_field((32, 32), 1))
        phase = forward_fft(0.5 * smooth_field((32, 32), 2))
        images = [np.real(inverse_fft(pair.h_abs * absorption + pair.h_ph * phase)) for pair in pairs]
        mask = _well_posed(pairs)

        result = dpc_solve(images, pairs, 1e-6, 1e-6)

        assert mask.sum() > 10
        assert _masked_error(result.phase_spectrum, phase, mask) < 1e-2
        assert _masked_error(result.absorption_spectrum, absorption, mask) < 1e-2
        assert np.isrealobj(result.phase)
        assert np.array_equal(dpc_invert(images, pairs, 1e-6, 1e-6), result.phase)

    def test_residual_of_exact_model_is_small(self, pairs):
        phase = forward_fft(0.5 * smooth_field((32, 32), 3))
        spectra = [pair.h_ph * phase for pair in pairs]

        result = dpc_solve([np.real(inverse_fft(s)) for s in spectra], pairs, 1e-8, 1e-8)

        assert dpc_residual(spectra, pairs, result.absorption_spectrum, result.phase_spectrum) < 1e-2

    def test_weak_phase_object(self, fine_system, bf_patterns, pairs):
        phase = 0.02 * smooth_field((32, 32), 4, sigma=1.5)
        obj = ObjectField(absorption=np.zeros((32, 32)), phase=phase, pitch=fine_system.object_pitch_um)
        images = [simulate_multiplexed(obj, fine_system, pattern) for pattern in bf_patterns]
        mask = _well_posed(pairs)
        mask[16, 16] = False

        result = dpc_from_intensities(images, pairs)

        assert mask.sum() > 10
        assert _masked_error(result.phase_spectrum, forward_fft(phase), mask) < 0.2

    def test_regularizers_must_be_positive(self, pairs):
        with pytest.raises(ConfigurationError):
            dpc_solve([np.zeros((32, 32))] * 2, pairs, tau1=0.0)

    def test_image_count_must_match(self, pairs):
        with pytest.raises(ShapeMismatchError):
            dpc_solve([np.zeros((32, 32))], pairs)

    def test_needs_two_images(self, pairs):
        with pytest.raises(ConfigurationError):
            dpc_solve([np.zeros((32, 32))], pairs[:1])
