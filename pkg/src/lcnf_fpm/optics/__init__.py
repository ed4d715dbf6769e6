from .fft import (
    ComplexField2D,
    FrequencyGrid,
    crop_spectrum,
    embed_spectrum,
    forward_fft,
    inverse_fft,
    make_frequency_axes,
)
from .illumination import (
    IlluminationPattern,
    classify_leds,
    led_pixel_offset,
    semicircle_and_arc_patterns,
    sequential_grid_pattern,
)
from .pupil import Pupil, make_pupil
