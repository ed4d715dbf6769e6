import json
from unittest.mock import patch

import pytest

from lcnf_fpm.api.requests import GradcheckRequest
from lcnf_fpm.core.exceptions import NumericalError
from lcnf_fpm.nn.gradcheck import GradcheckResult
from lcnf_fpm.services import run_gradcheck


class TestRunGradcheck:

    def test_summary_holds_worst_error_per_layer(self, writer):
        results = [
            GradcheckResult(layer="linear", config_index=0, max_relative_error=1e-9),
            GradcheckResult(layer="linear", config_index=1, max_relative_error=3e-8),
            GradcheckResult(layer="relu", config_index=0, max_relative_error=0.0),
        ]

        with patch("lcnf_fpm.services.gradcheck_service.run_gradchecks", return_value=results):
            summary = run_gradcheck(GradcheckRequest(configs=2), writer)

        assert summary == {"layers": {"linear": 3e-8, "relu": 0.0}, "passed": True}
        stored = json.loads((writer.out_dir / "gradcheck.json").read_text())
        assert stored["linear"] == pytest.approx(3e-8)
        assert [a.path for a in writer.manifest.artifacts] == ["gradcheck.json"]

    def test_failure_raises_after_writing_summary(self, writer):
        results = [GradcheckResult(layer="conv2d", config_index=0, max_relative_error=0.5)]

        with patch("lcnf_fpm.services.gradcheck_service.run_gradchecks", return_value=results):
            with pytest.raises(NumericalError) as e:
                run_gradcheck(GradcheckRequest(), writer)

        assert "conv2d" in str(e.value)
        assert (writer.out_dir / "gradcheck.json").exists()

    def test_real_check_passes(self, writer):
        summary = run_gradcheck(GradcheckRequest(configs=1), writer)

        assert summary["passed"]
        assert len(summary["layers"]) == 11
