from .checkpoint import Checkpoint, read_checkpoint, write_checkpoint
from .dataset_store import (
    read_dataset_split,
    read_measurements,
    write_dataset_split,
    write_measurements,
)
from .float_image import read_float_image, write_float_image
from .manifest import ManifestWriter, read_manifest, write_manifest
from .previews import save_phase_preview, save_spectrum_preview
