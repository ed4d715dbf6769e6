import numpy as np
import pytest

from lcnf_fpm.core.exceptions import PhysicsModelError
from lcnf_fpm.dpc import transfer_pairs_for, weak_object_transfer
from lcnf_fpm.optics import IlluminationPattern, make_pupil, semicircle_and_arc_patterns


@pytest.fixture
def patterns(fine_system):
    return semicircle_and_arc_patterns(fine_system)


class TestWeakObjectTransfer:

    def test_dc_values(self, fine_system, patterns):
        pairs = transfer_pairs_for(patterns[:2], fine_system, (32, 32), fine_system.object_pitch_um)

        for pair in pairs:
            assert pair.h_abs[16, 16] == pytest.approx(-2.0)
            assert abs(pair.h_ph[16, 16]) < 1e-12
            assert pair.background == 1.0

    def test_halves_have_opposite_phase_response(self, fine_system, patterns):
        upper, lower = transfer_pairs_for(patterns[:2], fine_system, (32, 32), fine_system.object_pitch_um)

        assert np.abs(upper.h_ph).max() > 0.5
        assert np.abs(lower.h_ph).max() > 0.5

    def test_symmetric_source_has_no_phase_contrast(self, fine_system, patterns):
        disk = IlluminationPattern.from_leds(
            np.concatenate([patterns[0].leds, patterns[1].leds]), fine_system, "bf-disk"
        )
        pupil = make_pupil(fine_system, (32, 32), fine_system.object_pitch_um)

        pair = weak_object_transfer(disk, pupil)

        assert np.allclose(pair.h_ph, 0, atol=1e-12)
        assert np.allclose(pair.h_abs.imag, 0, atol=1e-12)

    def test_darkfield_pattern_raises(self, fine_system):
        pupil = make_pupil(fine_system, (32, 32), fine_system.object_pitch_um)
        darkfield = IlluminationPattern.from_leds([(0.3 / 0.63, 0.0)], fine_system, "df")

        with pytest.raises(PhysicsModelError):
            weak_object_transfer(darkfield, pupil)
