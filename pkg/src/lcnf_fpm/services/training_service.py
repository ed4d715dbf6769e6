import csv
from pathlib import Path
from typing import Any

import numpy as np

from lcnf_fpm.api.requests import InferRequest, TrainRequest
from lcnf_fpm.config import logger
from lcnf_fpm.core.exceptions import ConfigurationError
from lcnf_fpm.io import (
    ManifestWriter,
    read_dataset_split,
    read_float_image,
    save_phase_preview,
    write_float_image,
)
from lcnf_fpm.lcnf import LcnfModel, Trainer, infer_grid, load_model
from lcnf_fpm.services.reconstruction_service import write_loss_csv


def _write_epoch_csv(path: Path, trainer: Trainer) -> Path:
    history = trainer.history
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["epoch", "train_loss", "val_loss", "lr"])
        for epoch, loss in enumerate(history.epoch_losses):
            val = repr(history.val_losses[epoch]) if epoch < len(history.val_losses) else ""
            writer.writerow([epoch, repr(loss), val, repr(history.learning_rates[epoch])])
    return path


class TrainingService:
    def train(self, request: TrainRequest, writer: ManifestWriter) -> dict[str, Any]:
        """
        Fit an LCNF model on a stored dataset split and write the best checkpoint.
        """
        config = request.lcnf
        train_pairs = read_dataset_split(request.train_index)
        val_pairs = read_dataset_split(request.val_index) if request.val_index else []
        scales = {pair.scale for pair in train_pairs + val_pairs}
        if scales and scales != {config.scale}:
            raise ConfigurationError(
                f"dataset scale {sorted(scales)} does not match the model scale {config.scale}"
            )
        model = LcnfModel(config)
        logger.info(f"Training a model with {model.parameter_count()} parameters on {len(train_pairs)} pairs")
        trainer = Trainer(model)
        history = trainer.fit(train_pairs, val_pairs)

        out = writer.out_dir
        writer.add_artifact(trainer.save(out / "model.ckpt"), "checkpoint")
        writer.add_artifact(write_loss_csv(out / "step_losses.csv", history.step_losses), "loss")
        writer.add_artifact(_write_epoch_csv(out / "epoch_losses.csv", trainer), "loss")
        return {
            "steps": trainer.steps,
            "epochs": len(history.epoch_losses),
            "initial_loss": history.step_losses[0] if history.step_losses else None,
            "final_loss": history.step_losses[-1] if history.step_losses else None,
            "best_epoch": history.best_epoch,
        }

    def infer(self, request: InferRequest, writer: ManifestWriter) -> dict[str, Any]:
        model, _ = load_model(request.checkpoint)
        if request.inputs:
            stacks = [("reconstruction", np.stack([read_float_image(p) for p in request.inputs]).astype(np.float64))]
        else:
            pairs = read_dataset_split(request.dataset_index)  # type: ignore[arg-type]
            stacks = [(f"pair_{k:04d}", pair.inputs) for k, pair in enumerate(pairs)]

        scale = request.scale or model.config.scale
        outputs = []
        for name, inputs in stacks:
            rows, cols = inputs.shape[1:]
            out_shape = request.out_shape or (int(round(rows * scale)), int(round(cols * scale)))
            phase = infer_grid(model, inputs, out_shape, jobs=request.jobs)
            path = writer.add_artifact(write_float_image(writer.out_dir / f"{name}_phase.pfm", phase), "phase")
            writer.add_artifact(save_phase_preview(writer.out_dir / f"{name}_phase.png", phase), "preview")
            outputs.append({"name": name, "path": str(path), "shape": list(out_shape)})
            logger.info(f"Inferred {name}: {inputs.shape[1:]} -> {out_shape}")
        return {"outputs": outputs}
