import numpy as np
import pytest

from lcnf_fpm.core.exceptions import ConfigurationError
from lcnf_fpm.preprocess import morphological_open, remove_background


class TestMorphologicalOpen:

    def test_anti_extensive_and_idempotent(self, rng):
        image = rng.random((20, 24))

        opened = morphological_open(image, 5)

        assert (opened <= image + 1e-15).all()
        assert np.array_equal(morphological_open(opened, 5), opened)

    def test_removes_features_smaller_than_kernel(self):
        image = np.full((9, 9), 0.2)
        image[4, 4] = 1.0

        background = remove_background(image, 3)

        assert background[4, 4] == pytest.approx(0.8)
        background[4, 4] = 0
        assert np.allclose(background, 0)

    def test_keeps_plateaus_wider_than_kernel(self):
        image = np.zeros((12, 12))
        image[2:9, 2:9] = 1.0

        assert np.array_equal(morphological_open(image, 5), image)

    @pytest.mark.parametrize("kernel", [2, 1, 13])
    def test_invalid_kernels(self, kernel):
        with pytest.raises(ConfigurationError):
            morphological_open(np.zeros((12, 12)), kernel)
