from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from lcnf_fpm.core.enums import Profile
from lcnf_fpm.core.schemas import (
    FpmConfig,
    LcnfConfig,
    PreprocessConfig,
    SimulationConfig,
    TilePlan,
)


class CommandRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    jobs: int = Field(1, ge=1)  # Worker threads where the command allows them

    @classmethod
    def profile_defaults(cls, profile: Profile) -> dict:
        return {}


class SimulateRequest(CommandRequest):
    seed: int  # Phantom seed; required
    simulation: SimulationConfig = Field(default_factory=SimulationConfig)
    mode: Literal["multiplexed", "sequential"] = "multiplexed"
    phantom: Literal["random", "bar-target"] = "random"

    @classmethod
    def profile_defaults(cls, profile: Profile) -> dict:
        return {"simulation": SimulationConfig.for_profile(profile).model_dump(mode="json")}


class DpcRequest(CommandRequest):
    measurements: str  # measurements.json written by simulate
    preprocess: PreprocessConfig = Field(default_factory=PreprocessConfig)

    @classmethod
    def profile_defaults(cls, profile: Profile) -> dict:
        return {"preprocess": PreprocessConfig.for_profile(profile).model_dump(mode="json")}


class FpmRequest(CommandRequest):
    measurements: str  # measurements.json of a sequential acquisition
    fpm: FpmConfig = Field(default_factory=FpmConfig)


class MakeDatasetRequest(CommandRequest):
    seed: int  # First phantom seed; pair k uses seed + k
    simulation: SimulationConfig = Field(default_factory=SimulationConfig)

    @classmethod
    def profile_defaults(cls, profile: Profile) -> dict:
        return {"simulation": SimulationConfig.for_profile(profile).model_dump(mode="json")}


class TrainRequest(CommandRequest):
    train_index: str  # train_index.json of make-dataset
    val_index: Optional[str] = None  # Optional validation split
    lcnf: LcnfConfig = Field(default_factory=LcnfConfig)

    @classmethod
    def profile_defaults(cls, profile: Profile) -> dict:
        return {"lcnf": LcnfConfig.for_profile(profile).model_dump(mode="json")}


class InferRequest(CommandRequest):
    checkpoint: str
    inputs: list[str] = []  # Six channel float-maps BF1, BF2, DF1, DF2, DF3, DPC
    dataset_index: Optional[str] = None  # Alternatively every pair of a dataset split
    scale: Optional[float] = Field(None, gt=0)  # Output/input size ratio, any positive value
    out_shape: Optional[tuple[int, int]] = None  # Explicit output grid, overrides scale

    @model_validator(mode="after")
    def check_source(self) -> "InferRequest":
        if bool(self.inputs) == bool(self.dataset_index):
            raise ValueError("give either six input channel files or a dataset index")
        if self.inputs and len(self.inputs) != 6:
            raise ValueError(f"inference needs 6 input channels, got {len(self.inputs)}")
        return self


class StitchRequest(CommandRequest):
    tiles: list[str]  # Tile float-maps in plan order
    plan: TilePlan  # Plan in measurement pixels
    scale: int = Field(1, ge=1)  # Reconstruction factor applied to the plan


class MetricsRequest(CommandRequest):
    pred: str
    ref: str
    dataset: str = ""
    method: str = ""
    units: Literal["normalized", "radians"] = "normalized"
    results_csv: Optional[str] = None  # Table to append a row to


class GradcheckRequest(CommandRequest):
    seed: int = 0
    configs: int = Field(10, ge=1)  # Random configurations per layer
