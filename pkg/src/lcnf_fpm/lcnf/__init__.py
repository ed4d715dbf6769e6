from .inference import bicubic_dpc_baseline, infer_grid, infer_normalized
from .latent import (
    EnsembleCorners,
    LatentGrid,
    decode_ensemble,
    decode_point,
    ensemble_corners,
    latent_centers,
    nearest_latent_index,
    pixel_center_coords,
    query_cell,
    select_latent,
    unfold_features,
)
from .model import ENCODER_GROUPS, Encoder, LcnfModel
from .trainer import Trainer, TrainingHistory, load_model, random_crop, sample_targets, train_step
