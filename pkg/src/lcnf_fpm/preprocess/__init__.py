from .intensity import CHANNEL_ORDER, clip_dynamic_range, normalize_intensity, prepare_network_inputs
from .morphology import morphological_open, remove_background
from .phase import center_crop, normalize_phase_target, prepare_phase_target, unwrap_phase, wrap_phase
from .spectral import condition_natural_image, ensemble_psd, power_law_psd, psd_match
