import csv

from lcnf_fpm.core.schemas import MetricReport
from lcnf_fpm.evaluation import append_results_csv, render_metrics_report


def _report(psnr_db=31.5):
    return MetricReport(mse=0.001, psnr_db=psnr_db, ssim=0.93, fm=0.4, config_hash="0123456789abcdef")


class TestMarkdownReport:

    def test_rows(self):
        text = render_metrics_report([("sim-test", "lcnf", _report()), ("sim-test", "dpc-bicubic", _report(float("inf")))])

        assert text.startswith("# Reconstruction metrics")
        assert "| sim-test | lcnf | 0.001 | 31.50 | 0.9300 | 0.4000 | normalized | 0123456789ab |" in text
        assert "| inf |" in text


class TestResultsCsv:

    def test_header_written_once(self, tmp_path):
        path = tmp_path / "results.csv"

        append_results_csv(_report(), path, "sim-test", "lcnf")
        append_results_csv(_report(), path, "sim-test", "fpm")

        with open(path, newline="") as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["Dataset", "Method", "MSE", "PSNR", "SSIM", "FM"]
        assert [row[1] for row in rows[1:]] == ["lcnf", "fpm"]
        assert float(rows[1][3]) == 31.5
