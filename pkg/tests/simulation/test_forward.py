import numpy as np
import pytest

from lcnf_fpm.core.enums import IlluminationKind
from lcnf_fpm.core.exceptions import (
    ConfigurationError,
    GridSupportError,
    PhysicsModelError,
    ShapeMismatchError,
)
from lcnf_fpm.optics import IlluminationPattern, semicircle_and_arc_patterns, sequential_grid_pattern
from lcnf_fpm.simulation import (
    MeasurementSet,
    ObjectField,
    add_poisson_noise,
    downsample_intensity,
    flat_field_intensity,
    generate_phantom,
    simulate_camera_image,
    simulate_multiplexed,
    simulate_patterns,
    simulate_sequential,
    simulate_single_led,
)


def _blank(shape, pitch):
    return ObjectField(absorption=np.zeros(shape), phase=np.zeros(shape), pitch=pitch)


@pytest.fixture
def hr_pitch(small_system):
    return small_system.object_pitch_um / 3


@pytest.fixture
def phantom(hr_pitch):
    return generate_phantom(3, (48, 48), pitch=hr_pitch)


class TestSingleLed:

    def test_blank_object_under_brightfield_is_uniform(self, small_system, hr_pitch):
        intensity = simulate_single_led(_blank((48, 48), hr_pitch), small_system, (0.0, 0.1))

        assert np.allclose(intensity, 1.0)

    def test_blank_object_under_darkfield_is_dark(self, small_system, hr_pitch):
        intensity = simulate_single_led(_blank((48, 48), hr_pitch), small_system, (0.3 / 0.63, 0.0))

        assert np.allclose(intensity, 0.0, atol=1e-12)

    def test_led_outside_grid_support_raises(self, small_system):
        with pytest.raises(GridSupportError) as e:
            simulate_single_led(_blank((16, 16), small_system.object_pitch_um), small_system, (0.3 / 0.63, 0.0))

        assert "required_nyquist" in e.value.details


class TestMultiplexed:

    def test_pattern_sums_single_leds(self, small_system, phantom):
        leds = [(0.0, 0.0), (0.05, -0.08)]
        pattern = IlluminationPattern.from_leds(leds, small_system)

        total = simulate_multiplexed(phantom, small_system, pattern)

        expected = sum(simulate_single_led(phantom, small_system, u) for u in leds)
        assert np.allclose(total, expected)

    def test_empty_pattern_raises(self, small_system, phantom):
        empty = IlluminationPattern(leds=np.zeros((0, 2)), kind=IlluminationKind.BRIGHTFIELD)

        with pytest.raises(ConfigurationError):
            simulate_multiplexed(phantom, small_system, empty)

    def test_parallel_patterns_match_serial(self, small_system, phantom):
        patterns = semicircle_and_arc_patterns(small_system)

        serial = simulate_patterns(phantom, small_system, patterns, 3, jobs=1)
        parallel = simulate_patterns(phantom, small_system, patterns, 3, jobs=3)

        assert serial.shape == (16, 16)
        for a, b in zip(serial.images, parallel.images):
            assert np.array_equal(a, b)

    def test_flat_field_needs_brightfield(self, small_system, hr_pitch):
        darkfield = semicircle_and_arc_patterns(small_system)[2:]

        with pytest.raises(PhysicsModelError):
            flat_field_intensity(small_system, darkfield, (48, 48), hr_pitch)


class TestDownsampleIntensity:

    def test_block_mean(self):
        pooled = downsample_intensity(np.arange(16, dtype=float).reshape(4, 4), 2)

        assert np.array_equal(pooled, [[2.5, 4.5], [10.5, 12.5]])

    def test_factor_must_divide(self):
        with pytest.raises(ConfigurationError):
            downsample_intensity(np.ones((4, 4)), 3)


class TestPoissonNoise:

    def test_mean_is_preserved(self, rng):
        noisy = add_poisson_noise(np.full((64, 64), 2.0), 1000.0, rng)

        assert noisy.mean() == pytest.approx(2.0, rel=0.01)
        assert (noisy >= 0).all()

    def test_rejects_non_positive_photons(self, rng):
        with pytest.raises(ConfigurationError):
            add_poisson_noise(np.ones((2, 2)), 0.0, rng)


class TestCameraModel:

    def test_blank_object_is_uniform_on_sensor(self, small_system, hr_pitch):
        image = simulate_camera_image(_blank((48, 48), hr_pitch), small_system, (0.05, 0.05), 3)

        assert image.shape == (16, 16)
        assert np.allclose(image, 1.0)

    def test_sequential_set(self, small_system, hr_pitch):
        patterns = sequential_grid_pattern(small_system, 5, max_illum_na=0.1)

        measurements = simulate_sequential(_blank((48, 48), hr_pitch), small_system, patterns, 3)

        assert len(measurements.images) == 5
        for image in measurements.images:
            assert np.allclose(image, 1.0)

    def test_factor_must_divide_object(self, small_system, hr_pitch):
        with pytest.raises(ConfigurationError):
            simulate_camera_image(_blank((48, 48), hr_pitch), small_system, (0.0, 0.0), 5)


class TestMeasurementSet:

    def test_counts_must_match(self, small_system):
        pattern = IlluminationPattern.from_leds([(0.0, 0.0)], small_system)

        with pytest.raises(ShapeMismatchError):
            MeasurementSet(images=[np.ones((4, 4))] * 2, patterns=[pattern], system=small_system)

    def test_negative_intensity_raises(self, small_system):
        pattern = IlluminationPattern.from_leds([(0.0, 0.0)], small_system)

        with pytest.raises(PhysicsModelError):
            MeasurementSet(images=[-np.ones((4, 4))], patterns=[pattern], system=small_system)

    def test_of_kind(self, small_system):
        patterns = semicircle_and_arc_patterns(small_system)
        images = [np.ones((4, 4))] * len(patterns)

        measurements = MeasurementSet(images=images, patterns=patterns, system=small_system)

        assert measurements.of_kind(IlluminationKind.BRIGHTFIELD) == [0, 1]
        assert measurements.of_kind(IlluminationKind.DARKFIELD) == [2, 3, 4]
        assert measurements.pitch == small_system.object_pitch_um
