import numpy as np
import pytest

from lcnf_fpm.core.exceptions import GridSupportError
from lcnf_fpm.optics import make_pupil


class TestMakePupil:

    def test_ideal_disk(self, desk_system):
        pupil = make_pupil(desk_system, (32, 32), desk_system.object_pitch_um)

        support = pupil.support()
        assert pupil.shape == (32, 32)
        assert pupil.mask[16, 16] == 1
        assert set(np.unique(pupil.mask.real)) == {0.0, 1.0}
        assert np.array_equal(pupil.mask.real > 0, support)
        assert pupil.grid.radius[support].max() <= desk_system.cutoff_freq * (1 + 1e-9)

    def test_coarse_grid_names_required_pitch(self, desk_system):
        with pytest.raises(GridSupportError) as e:
            make_pupil(desk_system, (16, 16), 4.0)

        assert e.value.details["required_pitch"] == pytest.approx(1 / (2 * desk_system.cutoff_freq))
        assert "pitch of at most" in str(e.value)
