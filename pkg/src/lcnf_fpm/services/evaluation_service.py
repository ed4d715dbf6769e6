from pathlib import Path
from typing import Any

import numpy as np

from lcnf_fpm.api.requests import MetricsRequest, StitchRequest
from lcnf_fpm.evaluation import append_results_csv, evaluate, render_metrics_report, stitch_alpha_blend
from lcnf_fpm.io import ManifestWriter, read_float_image, save_phase_preview, write_float_image


class EvaluationService:
    def stitch(self, request: StitchRequest, writer: ManifestWriter) -> dict[str, Any]:
        plan = request.plan.scaled(request.scale) if request.scale > 1 else request.plan
        tiles = [read_float_image(path).astype(np.float64) for path in request.tiles]
        mosaic = stitch_alpha_blend(tiles, plan, request.jobs)
        out = writer.out_dir
        writer.add_artifact(write_float_image(out / "stitched_phase.pfm", mosaic), "phase")
        writer.add_artifact(save_phase_preview(out / "stitched_phase.png", mosaic), "preview")
        return {"region_shape": list(plan.region_shape), "tiles": len(tiles)}

    def metrics(self, request: MetricsRequest, writer: ManifestWriter) -> dict[str, Any]:
        prediction = read_float_image(request.pred).astype(np.float64)
        reference = read_float_image(request.ref).astype(np.float64)
        report = evaluate(
            prediction,
            reference,
            pred_id=Path(request.pred).name,
            ref_id=Path(request.ref).name,
            units=request.units,
            config_hash=writer.manifest.config_hash,
        )
        out = writer.out_dir
        report_path = out / "metrics.json"
        report_path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
        writer.add_artifact(report_path, "metrics")
        markdown = out / "metrics.md"
        markdown.write_text(
            render_metrics_report([(request.dataset, request.method, report)]), encoding="utf-8"
        )
        writer.add_artifact(markdown, "report")
        if request.results_csv:
            writer.add_shared_output(
                append_results_csv(report, request.results_csv, request.dataset, request.method)
            )
        return report.model_dump(mode="json")
