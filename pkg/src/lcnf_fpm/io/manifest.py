from pathlib import Path
from typing import Any, Optional, Sequence

from pydantic import BaseModel, ValidationError

from lcnf_fpm import __version__
from lcnf_fpm.config import logger
from lcnf_fpm.core.exceptions import FileFormatError
from lcnf_fpm.core.schemas import ArtifactRecord, ExperimentManifest
from lcnf_fpm.utils import config_hash, file_sha256

MANIFEST_NAME = "manifest.json"
MANIFEST_VERSION = 1


def write_manifest(path: str | Path, manifest: ExperimentManifest) -> Path:
    path = Path(path)
    path.write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path


def read_manifest(path: str | Path) -> ExperimentManifest:
    try:
        manifest = ExperimentManifest.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except ValidationError as e:
        raise FileFormatError(f"{path} is not a valid manifest: {e.error_count()} errors") from e
    if manifest.version != MANIFEST_VERSION:
        raise FileFormatError(
            f"manifest version {manifest.version} is not supported (expected {MANIFEST_VERSION})"
        )
    return manifest


class ManifestWriter:
    """
    Keeps the manifest of one CLI run on disk.
    The manifest is written on construction, before any artifact, and rewritten after each artifact.
    """

    def __init__(
        self,
        out_dir: Path,
        command: str,
        config: BaseModel | dict[str, Any],
        seeds: Sequence[int] = (),
        dataset_index: Optional[str] = None,
        command_line: Optional[str] = None,
    ):
        self.out_dir = Path(out_dir)
        self.path = self.out_dir / MANIFEST_NAME
        payload = config.model_dump(mode="json") if isinstance(config, BaseModel) else config
        self.manifest = ExperimentManifest(
            tool_version=__version__,
            command=command,
            config_hash=config_hash(payload),
            config=payload,
            seeds=list(seeds),
            dataset_index=dataset_index,
            command_history=[command_line or command],
        )
        write_manifest(self.path, self.manifest)

    def add_artifact(self, path: Path, kind: str) -> Path:
        resolved = Path(path).resolve()
        if resolved.is_relative_to(self.out_dir.resolve()):
            relative = resolved.relative_to(self.out_dir.resolve()).as_posix()
        else:
            relative = resolved.as_posix()
        record = ArtifactRecord(path=relative, kind=kind, sha256=file_sha256(path))
        self.manifest.artifacts = [a for a in self.manifest.artifacts if a.path != relative] + [record]
        write_manifest(self.path, self.manifest)
        logger.info(f"Wrote {kind} artifact {relative}")
        return Path(path)

    def add_shared_output(self, path: Path) -> Path:
        """
        Record a file that several runs append to. It stays out of `artifacts` because its
        checksum changes with every later run.
        """
        shared = Path(path).resolve().as_posix()
        if shared not in self.manifest.shared_outputs:
            self.manifest.shared_outputs.append(shared)
            write_manifest(self.path, self.manifest)
        logger.info(f"Appended to shared output {shared}")
        return Path(path)

    def finish(self, status: str = "complete") -> None:
        self.manifest.status = status  # type: ignore[assignment]
        write_manifest(self.path, self.manifest)
