import csv
from pathlib import Path
from typing import Any

from lcnf_fpm.api.requests import DpcRequest, FpmRequest
from lcnf_fpm.config import logger
from lcnf_fpm.core.enums import IlluminationKind
from lcnf_fpm.dpc import dpc_from_intensities, transfer_pairs_for
from lcnf_fpm.fpm import fpm_reconstruct
from lcnf_fpm.io import (
    ManifestWriter,
    read_measurements,
    save_phase_preview,
    save_spectrum_preview,
    write_float_image,
)


def write_loss_csv(path: Path, losses: list[float], column: str = "loss") -> Path:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["index", column])
        for index, value in enumerate(losses):
            writer.writerow([index, repr(float(value))])
    return path


class ReconstructionService:
    def dpc(self, request: DpcRequest, writer: ManifestWriter) -> dict[str, Any]:
        """
        Linear phase retrieval from the brightfield images of a measurement set.
        """
        measurements = read_measurements(request.measurements)
        bright = measurements.of_kind(IlluminationKind.BRIGHTFIELD)
        pairs = transfer_pairs_for(
            [measurements.patterns[i] for i in bright],
            measurements.system,
            measurements.shape,
            measurements.pitch,
        )
        result = dpc_from_intensities(
            [measurements.images[i] for i in bright],
            pairs,
            request.preprocess.dpc_tau_absorption,
            request.preprocess.dpc_tau_phase,
        )
        out = writer.out_dir
        writer.add_artifact(write_float_image(out / "dpc_phase.pfm", result.phase), "phase")
        writer.add_artifact(save_phase_preview(out / "dpc_phase.png", result.phase), "preview")
        writer.add_artifact(
            save_spectrum_preview(out / "dpc_phase_spectrum.png", result.phase_spectrum), "preview"
        )
        logger.info(f"DPC from {len(bright)} brightfield images at {measurements.shape}")
        return {
            "brightfield_images": len(bright),
            "phase_min": float(result.phase.min()),
            "phase_max": float(result.phase.max()),
        }

    def fpm(self, request: FpmRequest, writer: ManifestWriter) -> dict[str, Any]:
        measurements = read_measurements(request.measurements)
        state = fpm_reconstruct(measurements, measurements.system, request.fpm)
        field = state.object_field()
        out = writer.out_dir
        writer.add_artifact(write_float_image(out / "object_field.pfm", field.data), "complex-field")
        writer.add_artifact(write_float_image(out / "object_phase.pfm", field.phase()), "phase")
        writer.add_artifact(write_float_image(out / "object_amplitude.pfm", field.amplitude()), "amplitude")
        writer.add_artifact(write_float_image(out / "pupil.pfm", state.pupil), "complex-field")
        writer.add_artifact(write_loss_csv(out / "loss_history.csv", state.loss_history, "objective"), "loss")
        writer.add_artifact(save_phase_preview(out / "object_phase.png", field.phase()), "preview")
        writer.add_artifact(save_spectrum_preview(out / "object_spectrum.png", state.object_spectrum), "preview")
        return {
            "object_shape": list(field.shape),
            "epochs": len(state.loss_history) - 1,
            "initial_objective": state.loss_history[0],
            "final_objective": state.loss_history[-1],
        }
