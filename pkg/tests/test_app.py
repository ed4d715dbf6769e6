import json
from unittest.mock import Mock, patch

import numpy as np
import pytest

from lcnf_fpm.api.requests import GradcheckRequest, TrainRequest
from lcnf_fpm.app import COMMANDS, build_parser, build_request, deep_merge, main
from lcnf_fpm.core.enums import ExitCode
from lcnf_fpm.core.exceptions import ConfigurationError, NumericalError
from lcnf_fpm.evaluation import plan_tiles
from lcnf_fpm.io import read_float_image, read_manifest, write_float_image


def _write_json(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def _stderr_payload(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def _stdout_summary(capsys):
    return json.loads(capsys.readouterr().out.strip().splitlines()[-1])


class TestBuildRequest:

    def test_profile_defaults_flags_and_file_are_layered(self, tmp_path):
        config = _write_json(tmp_path / "train.json", {"lcnf": {"crop": 24}})
        args = build_parser().parse_args(
            ["train", "--seed", "4", "--train-index", "idx.json", "--profile", "paper", "--config", config]
        )

        request = build_request("train", args)

        assert isinstance(request, TrainRequest)
        assert request.lcnf.encoder_channels == 128
        assert request.lcnf.crop == 24
        assert request.lcnf.seed == 4

    def test_missing_seed_raises(self):
        args = build_parser().parse_args(["make-dataset"])

        with pytest.raises(ConfigurationError) as e:
            build_request("make-dataset", args)

        assert "--seed is required" in str(e.value)

    def test_infer_scale_may_be_fractional(self):
        args = build_parser().parse_args(["infer", "--checkpoint", "m.ckpt", "--dataset-index", "i.json", "--scale", "2.5"])

        assert build_request("infer", args).scale == 2.5

    def test_deep_merge_keeps_sibling_keys(self):
        merged = deep_merge({"a": {"b": 1, "c": 2}, "d": 3}, {"a": {"b": 5}})

        assert merged == {"a": {"b": 5, "c": 2}, "d": 3}


class TestExitCodes:

    def test_gradcheck_succeeds(self, tmp_path, capsys):
        out_dir = tmp_path / "gradcheck"

        code = main(["gradcheck", "--configs", "1", "--out-dir", str(out_dir)])

        manifest = read_manifest(out_dir / "manifest.json")
        assert code == ExitCode.SUCCESS
        assert manifest.status == "complete"
        assert manifest.command_history[0].startswith("lcnf-fpm gradcheck --configs 1")
        assert _stdout_summary(capsys)["passed"] is True

    def test_missing_seed_is_a_config_error(self, tmp_path, capsys):
        code = main(["simulate", "--out-dir", str(tmp_path)])

        assert code == ExitCode.CONFIG_ERROR
        assert _stderr_payload(capsys)["error"] == "ConfigurationError"

    def test_unknown_config_key_is_a_config_error(self, tmp_path, capsys):
        config = _write_json(tmp_path / "bad.json", {"simulation": {"photon_count": 10}})

        code = main(["simulate", "--seed", "1", "--config", config, "--out-dir", str(tmp_path / "out")])

        payload = _stderr_payload(capsys)
        assert code == ExitCode.CONFIG_ERROR
        assert payload["details"]["errors"][0]["type"] == "extra_forbidden"

    def test_fractional_scale_for_simulation_is_rejected(self, tmp_path):
        assert main(["simulate", "--seed", "1", "--scale", "2.5", "--out-dir", str(tmp_path)]) == ExitCode.CONFIG_ERROR

    def test_numerical_failure_marks_manifest_failed(self, tmp_path, capsys):
        failing = Mock(side_effect=NumericalError("loss became nan", {"step": 3}))
        out_dir = tmp_path / "run"

        with patch.dict(COMMANDS, {"gradcheck": (GradcheckRequest, failing, "")}):
            code = main(["gradcheck", "--out-dir", str(out_dir)])

        payload = _stderr_payload(capsys)
        assert code == ExitCode.NUMERIC_FAILURE
        assert payload == {"error": "NumericalError", "message": "loss became nan", "details": {"step": 3}}
        assert read_manifest(out_dir / "manifest.json").status == "failed"

    def test_unexpected_error(self, tmp_path):
        with patch.dict(COMMANDS, {"gradcheck": (GradcheckRequest, Mock(side_effect=KeyError("x")), "")}):
            assert main(["gradcheck", "--out-dir", str(tmp_path)]) == ExitCode.UNEXPECTED

    def test_default_output_root_from_environment(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        monkeypatch.setenv("LCNF_FPM_OUTPUT_ROOT", str(tmp_path / "outputs"))

        assert main(["gradcheck", "--configs", "1"]) == ExitCode.SUCCESS
        assert (tmp_path / "outputs" / "gradcheck" / "manifest.json").exists()


class TestCommands:

    def test_simulate_then_dpc(self, tmp_path, capsys):
        config = _write_json(tmp_path / "sim.json", {"simulation": {"system": {"sensor_shape": [16, 16]}}})
        sim_dir = tmp_path / "sim"

        assert main(["simulate", "--seed", "3", "--config", config, "--out-dir", str(sim_dir)]) == 0
        summary = _stdout_summary(capsys)
        assert summary["images"] == 5
        assert read_manifest(sim_dir / "manifest.json").seeds == [3]

        dpc_dir = tmp_path / "dpc"
        measurements = str(sim_dir / "measurements" / "measurements.json")
        assert main(["dpc", "--measurements", measurements, "--out-dir", str(dpc_dir)]) == 0
        assert read_float_image(dpc_dir / "dpc_phase.pfm").shape == (16, 16)

    def test_metrics(self, tmp_path, capsys):
        reference = np.linspace(0, 1, 256).reshape(16, 16)
        pred = write_float_image(tmp_path / "pred.pfm", reference + 0.1)
        ref = write_float_image(tmp_path / "ref.pfm", reference)
        out_dir = tmp_path / "metrics"

        code = main(
            ["metrics", "--pred", str(pred), "--ref", str(ref), "--method", "dpc", "--out-dir", str(out_dir)]
        )

        assert code == 0
        assert _stdout_summary(capsys)["psnr_db"] == pytest.approx(20.0, abs=1e-3)
        kinds = [a.kind for a in read_manifest(out_dir / "manifest.json").artifacts]
        assert kinds == ["metrics", "report"]

    def test_stitch_with_plan_file(self, tmp_path):
        plan = plan_tiles((10, 10), 4, 1)
        plan_path = tmp_path / "plan.json"
        plan_path.write_text(plan.model_dump_json(), encoding="utf-8")
        tiles = [str(write_float_image(tmp_path / f"t{k}.pfm", np.full((8, 8), 0.5))) for k in range(9)]
        out_dir = tmp_path / "stitch"

        code = main(["stitch", "--plan", str(plan_path), "--scale", "2", "--out-dir", str(out_dir), "--tiles", *tiles])

        assert code == 0
        mosaic = read_float_image(out_dir / "stitched_phase.pfm")
        assert mosaic.shape == (20, 20)
        assert np.allclose(mosaic, 0.5)
