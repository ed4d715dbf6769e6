from typing import Any

from lcnf_fpm.api.requests import MakeDatasetRequest, SimulateRequest
from lcnf_fpm.config import logger
from lcnf_fpm.fpm import upsample_factor_for
from lcnf_fpm.io import ManifestWriter, save_phase_preview, write_dataset_split, write_float_image, write_measurements
from lcnf_fpm.optics import semicircle_and_arc_patterns, sequential_grid_pattern
from lcnf_fpm.simulation import (
    MeasurementSet,
    ObjectField,
    add_poisson_noise,
    flat_field_intensity,
    generate_phantom,
    resolution_target_phantom,
    simulate_patterns,
    simulate_sequential,
)
from lcnf_fpm.simulation.dataset import build_phantom_dataset, split_dataset
from lcnf_fpm.utils import make_rng


class SimulationService:
    def _make_object(self, request: SimulateRequest, factor: int) -> ObjectField:
        config = request.simulation
        rows, cols = config.system.sensor_shape
        shape = (rows * factor, cols * factor)
        pitch = config.system.object_pitch_um / factor
        if request.phantom == "bar-target":
            return resolution_target_phantom(shape, pitch=pitch)
        return generate_phantom(request.seed, shape, config.phase_range, config.max_absorption, pitch)

    def simulate(self, request: SimulateRequest, writer: ManifestWriter) -> dict[str, Any]:
        """
        Simulate one phantom under the multiplexed patterns or the sequential LED grid.
        The sequential grid is refined beyond `scale` when the LED windows need it.
        """
        config = request.simulation
        system = config.system
        rng = make_rng(request.seed)

        if request.mode == "multiplexed":
            patterns = semicircle_and_arc_patterns(
                system, config.max_illum_na, config.arc_count, config.led_spacing_na
            )
            factor = config.scale
            obj = self._make_object(request, factor)
            normalization = flat_field_intensity(system, patterns, obj.shape, obj.pitch)
            measurements = simulate_patterns(obj, system, patterns, factor, normalization, request.jobs)
            if config.photons is not None:
                measurements = MeasurementSet(
                    images=[add_poisson_noise(image, config.photons, rng) for image in measurements.images],
                    patterns=measurements.patterns,
                    system=system,
                )
        else:
            patterns = sequential_grid_pattern(system, config.sequential_led_count, config.max_illum_na)
            factor = max(config.scale, upsample_factor_for(system, patterns, system.sensor_shape))
            obj = self._make_object(request, factor)
            measurements = simulate_sequential(obj, system, patterns, factor, config.photons, rng)
        logger.info(f"Simulated {len(measurements.images)} {request.mode} images of a {obj.shape} object")

        index_path, files = write_measurements(measurements, writer.out_dir / "measurements", request.mode)
        for path in files:
            writer.add_artifact(path, "measurement")
        writer.add_artifact(index_path, "measurement-index")
        writer.add_artifact(write_float_image(writer.out_dir / "object_phase.pfm", obj.phase), "ground-truth")
        writer.add_artifact(
            write_float_image(writer.out_dir / "object_absorption.pfm", obj.absorption), "ground-truth"
        )
        writer.add_artifact(save_phase_preview(writer.out_dir / "object_phase.png", obj.phase), "preview")
        return {
            "measurements": str(index_path),
            "images": len(files),
            "object_shape": list(obj.shape),
            "factor": factor,
        }

    def make_dataset(self, request: MakeDatasetRequest, writer: ManifestWriter) -> dict[str, Any]:
        config = request.simulation
        total = config.train_count + config.val_count + config.test_count
        seeds = [request.seed + k for k in range(total)]
        pairs = build_phantom_dataset(config, seeds, request.jobs)
        splits = split_dataset(pairs, config.train_count, config.val_count, config.test_count)
        writer.manifest.dataset_index = "train_index.json"
        counts = {}
        for name, subset in zip(("train", "val", "test"), splits):
            index_path, files = write_dataset_split(subset, writer.out_dir, name, writer.manifest.config_hash)
            for path in files:
                writer.add_artifact(path, "dataset-image")
            writer.add_artifact(index_path, "dataset-index")
            counts[name] = len(subset)
        if splits[0]:
            sample = splits[0][0]
            writer.add_artifact(
                save_phase_preview(writer.out_dir / "train_0000_target.png", sample.target), "preview"
            )
        return {"pairs": counts, "input_shape": list(config.system.sensor_shape), "scale": config.scale}
