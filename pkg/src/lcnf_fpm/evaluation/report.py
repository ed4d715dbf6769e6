import csv
import math
import os
from pathlib import Path
from typing import Sequence

from jinja2 import Environment, FileSystemLoader, select_autoescape

from lcnf_fpm.core.schemas import MetricReport

TEMPLATES_DIR = Path(os.path.dirname(os.path.abspath(__file__))).parent / "templates"
RESULT_COLUMNS = ("Dataset", "Method", "MSE", "PSNR", "SSIM", "FM")


class ReportTemplateProcessor:
    def __init__(self, templates_dir: str | Path = TEMPLATES_DIR):
        """
        Initialize the template processor with a directory containing report templates.

        Args:
            templates_dir: Path to the directory containing report templates
        """
        self.env = Environment(
            loader=FileSystemLoader(str(templates_dir)),
            autoescape=select_autoescape(),
            trim_blocks=True,
            lstrip_blocks=True,
        )

    def render_template(self, template_name: str, **kwargs) -> str:
        template = self.env.get_template(template_name)
        return template.render(**kwargs)


def _format_psnr(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.2f}"


def render_metrics_report(
    rows: Sequence[tuple[str, str, MetricReport]],
    title: str = "Reconstruction metrics",
    processor: ReportTemplateProcessor | None = None,
) -> str:
    """
    Markdown table of (dataset, method, report) rows.
    """
    processor = processor or ReportTemplateProcessor()
    entries = [
        {
            "dataset": dataset,
            "method": method,
            "mse": f"{report.mse:.4g}",
            "psnr": _format_psnr(report.psnr_db),
            "ssim": f"{report.ssim:.4f}",
            "fm": f"{report.fm:.4f}",
            "units": report.units,
            "config_hash": report.config_hash[:12],
        }
        for dataset, method, report in rows
    ]
    return processor.render_template("metrics_report.md.jinja2", title=title, rows=entries)


def append_results_csv(report: MetricReport, path: str | Path, dataset: str, method: str) -> Path:
    """
    Append one row to a results table, writing the header when the file is new.
    """
    path = Path(path)
    is_new = not path.exists() or path.stat().st_size == 0
    with open(path, "a", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        if is_new:
            writer.writerow(RESULT_COLUMNS)
        writer.writerow(
            [dataset, method, repr(report.mse), repr(report.psnr_db), repr(report.ssim), repr(report.fm)]
        )
    return path
