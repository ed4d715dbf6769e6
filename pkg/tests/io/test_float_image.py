import numpy as np
import pytest

from lcnf_fpm.core.exceptions import FileFormatError, ShapeMismatchError
from lcnf_fpm.io import read_float_image, write_float_image


class TestFloatImage:

    def test_real_round_trip(self, tmp_path, rng):
        image = rng.standard_normal((3, 4))

        path = write_float_image(tmp_path / "real.pfm", image)
        restored = read_float_image(path)

        assert restored.dtype == np.float32
        assert np.array_equal(restored, image.astype(np.float32))

    def test_complex_round_trip(self, tmp_path, rng):
        image = rng.standard_normal((5, 2)) + 1j * rng.standard_normal((5, 2))

        restored = read_float_image(write_float_image(tmp_path / "field.pfm", image))

        assert restored.dtype == np.complex64
        assert np.array_equal(restored, image.astype(np.complex64))

    def test_header_and_bottom_up_rows(self, tmp_path):
        image = np.arange(12, dtype=float).reshape(3, 4)

        data = write_float_image(tmp_path / "ramp.pfm", image).read_bytes()

        header = b"Pf\n4 3\n-1.0\n"
        assert data.startswith(header)
        first_row = np.frombuffer(data, dtype="<f4", count=4, offset=len(header))
        assert np.array_equal(first_row, [8, 9, 10, 11])

    def test_big_endian_payload(self, tmp_path):
        image = np.array([[1.5, -2.0]], dtype=">f4")
        path = tmp_path / "big.pfm"
        path.write_bytes(b"Pf\n2 1\n1.0\n" + image.tobytes())

        assert np.array_equal(read_float_image(path), [[1.5, -2.0]])

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.pfm"
        path.write_bytes(b"P6\n1 1\n255\n\x00\x00\x00")

        with pytest.raises(FileFormatError):
            read_float_image(path)

    def test_truncated_payload(self, tmp_path):
        path = write_float_image(tmp_path / "cut.pfm", np.ones((3, 4)))
        path.write_bytes(path.read_bytes()[:-4])

        with pytest.raises(FileFormatError) as e:
            read_float_image(path)

        assert e.value.details == {"expected_bytes": 48, "actual_bytes": 44}

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileFormatError):
            read_float_image(tmp_path / "absent.pfm")

    def test_only_2d_images(self, tmp_path):
        with pytest.raises(ShapeMismatchError):
            write_float_image(tmp_path / "cube.pfm", np.zeros((2, 2, 2)))
