import argparse
import json
import shlex
import sys
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

from pydantic import ValidationError

from lcnf_fpm.api.requests import (
    CommandRequest,
    DpcRequest,
    FpmRequest,
    GradcheckRequest,
    InferRequest,
    MakeDatasetRequest,
    MetricsRequest,
    SimulateRequest,
    StitchRequest,
    TrainRequest,
)
from lcnf_fpm.config import logger
from lcnf_fpm.core import handle_exceptions
from lcnf_fpm.core.enums import ExitCode, Profile
from lcnf_fpm.core.exceptions import ConfigurationError
from lcnf_fpm.io import ManifestWriter
from lcnf_fpm.services import (
    EvaluationService,
    ReconstructionService,
    SimulationService,
    TrainingService,
    run_gradcheck,
)
from lcnf_fpm.utils import resolve_out_dir

simulation_service = SimulationService()
reconstruction_service = ReconstructionService()
training_service = TrainingService()
evaluation_service = EvaluationService()

COMMANDS: dict[str, tuple[type[CommandRequest], Callable[[Any, ManifestWriter], dict[str, Any]], str]] = {
    "simulate": (SimulateRequest, simulation_service.simulate, "simulate measurements of a phantom"),
    "dpc": (DpcRequest, reconstruction_service.dpc, "linear DPC phase retrieval"),
    "fpm": (FpmRequest, reconstruction_service.fpm, "iterative FPM reconstruction"),
    "make-dataset": (MakeDatasetRequest, simulation_service.make_dataset, "build paired training data"),
    "train": (TrainRequest, training_service.train, "train the LCNF model"),
    "infer": (InferRequest, training_service.infer, "reconstruct phase at any output resolution"),
    "stitch": (StitchRequest, evaluation_service.stitch, "alpha-blend tiles into a wide field of view"),
    "metrics": (MetricsRequest, evaluation_service.metrics, "MSE, PSNR, SSIM and FM of a prediction"),
    "gradcheck": (GradcheckRequest, run_gradcheck, "finite-difference check of every layer"),
}

# Commands whose output depends on a random seed.
STOCHASTIC_COMMANDS = ("simulate", "make-dataset", "train")

# Command-specific flags: (flag, request field, argparse options).
COMMAND_FLAGS: dict[str, list[tuple[str, str, dict[str, Any]]]] = {
    "simulate": [
        ("--mode", "mode", {"choices": ["multiplexed", "sequential"]}),
        ("--phantom", "phantom", {"choices": ["random", "bar-target"]}),
    ],
    "dpc": [("--measurements", "measurements", {})],
    "fpm": [("--measurements", "measurements", {})],
    "make-dataset": [],
    "train": [("--train-index", "train_index", {}), ("--val-index", "val_index", {})],
    "infer": [
        ("--checkpoint", "checkpoint", {}),
        ("--inputs", "inputs", {"nargs": 6}),
        ("--dataset-index", "dataset_index", {}),
        ("--out-shape", "out_shape", {"nargs": 2, "type": int}),
    ],
    "stitch": [("--tiles", "tiles", {"nargs": "+"}), ("--plan", "plan", {"help": "TilePlan JSON file"})],
    "metrics": [
        ("--pred", "pred", {}),
        ("--ref", "ref", {}),
        ("--dataset", "dataset", {}),
        ("--method", "method", {}),
        ("--units", "units", {"choices": ["normalized", "radians"]}),
        ("--results-csv", "results_csv", {}),
    ],
    "gradcheck": [("--configs", "configs", {"type": int})],
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file layered over the profile defaults")
    common.add_argument("--seed", type=int)
    common.add_argument("--out-dir", help="output directory (default: $LCNF_FPM_OUTPUT_ROOT/<command>)")
    common.add_argument("--scale", type=float)
    common.add_argument("--jobs", type=int)
    common.add_argument("--profile", choices=[p.value for p in Profile], default=Profile.DESK.value)

    parser = argparse.ArgumentParser(prog="lcnf-fpm", description="Multiplexed FPM simulation and reconstruction")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, (_, _, description) in COMMANDS.items():
        command = subparsers.add_parser(name, parents=[common], help=description)
        for flag, field, options in COMMAND_FLAGS[name]:
            command.add_argument(flag, dest=field, **options)
    return parser


def deep_merge(base: dict[str, Any], update: dict[str, Any]) -> dict[str, Any]:
    merged = dict(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config_file(path: str) -> dict[str, Any]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigurationError(f"cannot read config file {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigurationError(f"config file {path} must hold a JSON object")
    return data


def _integer_scale(scale: float) -> int:
    if not float(scale).is_integer():
        raise ConfigurationError(f"--scale must be an integer for this command, got {scale}")
    return int(scale)


def flag_overrides(command: str, args: argparse.Namespace) -> dict[str, Any]:
    """
    Translate command-line flags into a partial request dict.
    """
    overrides: dict[str, Any] = {}
    if args.jobs is not None:
        overrides["jobs"] = args.jobs
    if args.seed is not None:
        if command == "train":
            overrides["lcnf"] = {"seed": args.seed}
        elif command in ("simulate", "make-dataset", "gradcheck"):
            overrides["seed"] = args.seed
    if args.scale is not None:
        if command in ("simulate", "make-dataset"):
            overrides["simulation"] = {"scale": _integer_scale(args.scale)}
        elif command == "train":
            overrides = deep_merge(overrides, {"lcnf": {"scale": _integer_scale(args.scale)}})
        elif command == "fpm":
            overrides["fpm"] = {"upsample_factor": _integer_scale(args.scale)}
        elif command == "stitch":
            overrides["scale"] = _integer_scale(args.scale)
        elif command == "infer":
            overrides["scale"] = args.scale
    for _, field, _ in COMMAND_FLAGS[command]:
        value = getattr(args, field, None)
        if value is None:
            continue
        if field == "plan":
            value = load_config_file(value)
        overrides[field] = value
    return overrides


def _has_seed(command: str, data: dict[str, Any]) -> bool:
    if command == "train":
        return "seed" in data.get("lcnf", {})
    return "seed" in data


def build_request(command: str, args: argparse.Namespace) -> CommandRequest:
    """
    Layer profile defaults, the JSON config file and flag overrides, then validate once.
    Raises:
        ConfigurationError: On unknown keys, invalid values or a missing seed
    """
    request_cls = COMMANDS[command][0]
    explicit: dict[str, Any] = load_config_file(args.config) if args.config else {}
    explicit = deep_merge(explicit, flag_overrides(command, args))
    if command in STOCHASTIC_COMMANDS and not _has_seed(command, explicit):
        raise ConfigurationError(f"--seed is required for {command}")
    data = deep_merge(request_cls.profile_defaults(Profile(args.profile)), explicit)
    try:
        return request_cls.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(
            f"invalid {command} configuration: {e.error_count()} errors",
            {"errors": e.errors(include_url=False)},
        ) from e


def request_seeds(request: CommandRequest) -> list[int]:
    if isinstance(request, MakeDatasetRequest):
        config = request.simulation
        return list(range(request.seed, request.seed + config.train_count + config.val_count + config.test_count))
    if isinstance(request, TrainRequest):
        return [request.lcnf.seed]
    seed = getattr(request, "seed", None)
    return [seed] if seed is not None else []


@handle_exceptions
def run(argv: Sequence[str]) -> int:
    args = build_parser().parse_args(argv)
    request = build_request(args.command, args)
    out_dir = resolve_out_dir(args.out_dir, args.command)
    writer = ManifestWriter(
        out_dir,
        args.command,
        request,
        seeds=request_seeds(request),
        dataset_index=getattr(request, "train_index", None) or getattr(request, "dataset_index", None),
        command_line=shlex.join(["lcnf-fpm", *argv]),
    )
    try:
        summary = COMMANDS[args.command][1](request, writer)
    except Exception:
        writer.finish("failed")
        raise
    writer.finish()
    logger.info(f"{args.command} finished; manifest at {writer.path}")
    print(json.dumps(summary, default=str, sort_keys=True))
    return int(ExitCode.SUCCESS)


def main(argv: Optional[Sequence[str]] = None) -> int:
    return run(list(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    sys.exit(main())
