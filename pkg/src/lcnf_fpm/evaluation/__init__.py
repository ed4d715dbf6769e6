from .metrics import (
    background_std,
    evaluate,
    frequency_measure,
    gaussian_window,
    mse,
    psnr,
    ssim,
)
from .report import ReportTemplateProcessor, append_results_csv, render_metrics_report
from .stitching import (
    fov_mask,
    normalized_tile_weights,
    plan_tiles,
    stitch_alpha_blend,
    tile_weights,
)
