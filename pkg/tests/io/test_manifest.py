import json

import pytest

from lcnf_fpm.core.exceptions import FileFormatError
from lcnf_fpm.core.schemas import FpmConfig
from lcnf_fpm.io import ManifestWriter, read_manifest
from lcnf_fpm.utils import config_hash


class TestManifestWriter:

    def test_written_before_any_artifact(self, tmp_path):
        writer = ManifestWriter(tmp_path, "fpm", FpmConfig(), seeds=[3])

        manifest = read_manifest(tmp_path / "manifest.json")
        assert manifest.status == "running"
        assert manifest.command == "fpm"
        assert manifest.seeds == [3]
        assert manifest.artifacts == []
        assert manifest.config_hash == config_hash(FpmConfig())
        assert writer.path == tmp_path / "manifest.json"

    def test_artifacts_are_relative_and_hashed(self, tmp_path):
        writer = ManifestWriter(tmp_path, "stitch", {"tile_size": 4})
        (tmp_path / "out").mkdir()
        artifact = tmp_path / "out" / "stitched.pfm"
        artifact.write_bytes(b"data")

        writer.add_artifact(artifact, "phase")
        writer.add_artifact(artifact, "phase")

        records = read_manifest(writer.path).artifacts
        assert len(records) == 1
        assert records[0].path == "out/stitched.pfm"
        assert len(records[0].sha256) == 64

    def test_outside_artifacts_keep_absolute_paths(self, tmp_path):
        run_dir = tmp_path / "run"
        run_dir.mkdir()
        writer = ManifestWriter(run_dir, "metrics", {})
        outside = tmp_path / "results.csv"
        outside.write_text("x\n")

        writer.add_artifact(outside, "table")

        assert read_manifest(writer.path).artifacts[0].path == outside.resolve().as_posix()

    def test_shared_outputs_stay_out_of_artifacts(self, tmp_path):
        table = tmp_path / "results.csv"
        table.write_text("dataset,method\n")
        (tmp_path / "a").mkdir()
        (tmp_path / "b").mkdir()
        first = ManifestWriter(tmp_path / "a", "metrics", {})
        second = ManifestWriter(tmp_path / "b", "metrics", {})

        first.add_shared_output(table)
        first.add_shared_output(table)
        second.add_shared_output(table)

        for writer in (first, second):
            manifest = read_manifest(writer.path)
            assert manifest.artifacts == []
            assert manifest.shared_outputs == [table.resolve().as_posix()]

    def test_finish(self, tmp_path):
        writer = ManifestWriter(tmp_path, "train", {}, command_line="lcnf-fpm train --seed 1")

        writer.finish()

        manifest = read_manifest(writer.path)
        assert manifest.status == "complete"
        assert manifest.command_history == ["lcnf-fpm train --seed 1"]


class TestReadManifest:

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps({"command": "x"}))

        with pytest.raises(FileFormatError):
            read_manifest(path)

    def test_unsupported_version(self, tmp_path):
        writer = ManifestWriter(tmp_path, "fpm", {})
        payload = json.loads(writer.path.read_text())
        payload["version"] = 9
        writer.path.write_text(json.dumps(payload))

        with pytest.raises(FileFormatError):
            read_manifest(writer.path)
