from .forward import (
    MeasurementSet,
    add_poisson_noise,
    downsample_intensity,
    flat_field_intensity,
    simulate_camera_image,
    simulate_multiplexed,
    simulate_patterns,
    simulate_sequential,
    simulate_single_led,
)
from .objects import ObjectField, generate_phantom, object_from_image, resolution_target_phantom
