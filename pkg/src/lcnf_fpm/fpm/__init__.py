from .analysis import align_global_phase, band_limit, relative_error, spectrum_support_fraction
from .solver import FpmState, fpm_objective, fpm_reconstruct, initial_state, synthetic_na, upsample_factor_for
