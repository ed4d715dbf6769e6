from fractions import Fraction
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from lcnf_fpm.core.enums import Profile

# Highest illumination NA reachable on the LED board.
MAX_ILLUMINATION_NA = 0.41


class OpticalSystem(BaseModel):
    """
    Microscope description shared by every physics module.
    Lengths are in micrometres, frequencies in inverse micrometres.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    wavelength_um: float = Field(0.63, gt=0)
    objective_na: float = Field(0.1, gt=0, lt=1)
    magnification: float = Field(4.0, gt=0)
    camera_pixel_um: float = Field(6.5, gt=0)
    sensor_shape: tuple[int, int] = (32, 32)

    @field_validator("sensor_shape")
    @classmethod
    def check_sensor_shape(cls, value: tuple[int, int]) -> tuple[int, int]:
        if value[0] < 1 or value[1] < 1:
            raise ValueError(f"sensor_shape must be at least 1x1, got {value}")
        return value

    @property
    def object_pitch_um(self) -> float:
        return self.camera_pixel_um / self.magnification

    @property
    def cutoff_freq(self) -> float:
        return self.objective_na / self.wavelength_um


class PreprocessConfig(BaseModel):
    """
    Conditioning constants for measurements, phase targets and natural images.
    Full-size kernels are odd (51 and 21) so the structuring element has a centre pixel.
    """

    model_config = ConfigDict(extra="forbid")

    clip_fraction: float = Field(0.001, ge=0, lt=0.5)
    open_kernel_lr: int = 31
    open_kernel_hr: int = 51
    open_kernel_sim: int = 21
    phase_clip_max: float = Field(12.0, gt=0)
    sim_value_threshold: float = Field(0.6, gt=0)
    sim_phase_scale: float = Field(9.0, gt=0)
    sim_phase_offset: float = -2.5
    dpc_tau_absorption: float = Field(1e-3, gt=0)
    dpc_tau_phase: float = Field(1e-3, gt=0)
    per_image_mean: bool = True

    @field_validator("open_kernel_lr", "open_kernel_hr", "open_kernel_sim")
    @classmethod
    def check_kernel(cls, value: int) -> int:
        if value < 3 or value % 2 == 0:
            raise ValueError(f"morphological kernels must be odd and >= 3, got {value}")
        return value

    @classmethod
    def for_profile(cls, profile: Profile) -> "PreprocessConfig":
        if profile == Profile.PAPER:
            return cls()
        return cls(open_kernel_lr=5, open_kernel_hr=3, open_kernel_sim=3)


class FpmConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    epochs: int = Field(50, ge=1)
    object_step: float = Field(1.0, gt=0, le=2)
    pupil_step: float = Field(1.0, gt=0, le=2)
    enable_pupil_recovery: bool = True
    enable_offsets: bool = False
    ordering: Literal["center-out"] = "center-out"
    upsample_factor: Optional[int] = Field(None, ge=1)


class AdamConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    lr: float = Field(1e-4, gt=0)
    beta1: float = Field(0.9, ge=0, lt=1)
    beta2: float = Field(0.999, ge=0, lt=1)
    eps: float = Field(1e-8, gt=0)


class PlateauConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    factor: float = Field(0.2, gt=0, lt=1)
    patience: int = Field(10, ge=1)


class LcnfConfig(BaseModel):
    """
    Network, sampling and optimisation settings of the LCNF model.
    The defaults are the desk-scale profile; the full-size profile matches the large reference network.
    """

    model_config = ConfigDict(extra="forbid")

    encoder_channels: int = Field(32, ge=1)
    residual_blocks: int = Field(4, ge=0)
    res_scale: float = 1.0
    mlp_hidden: int = Field(256, ge=1)
    mlp_layers: int = Field(5, ge=2)
    coords_per_step: int = Field(256, ge=1)
    crop: int = Field(32, ge=1)
    scale: int = Field(3, ge=1)
    batch: int = Field(4, ge=1)
    feature_unfold: bool = True
    cell_decode: bool = True
    local_ensemble: bool = True
    adam: AdamConfig = Field(default_factory=AdamConfig)
    plateau: PlateauConfig = Field(default_factory=PlateauConfig)
    epochs: int = Field(100, ge=1)
    max_steps: Optional[int] = Field(None, ge=1)
    inference_chunk: int = Field(8192, ge=1)
    phase_scale: float = Field(9.0, gt=0)
    phase_offset: float = -2.5
    seed: int = 0

    @property
    def encoder_count(self) -> int:
        return 3

    @property
    def latent_dim(self) -> int:
        return self.encoder_count * self.encoder_channels

    @property
    def decoder_feature_dim(self) -> int:
        return self.latent_dim * (9 if self.feature_unfold else 1)

    @property
    def mlp_input_dim(self) -> int:
        return self.decoder_feature_dim + 2 + (2 if self.cell_decode else 0)

    @property
    def latent_spacing(self) -> int:
        return 2

    @property
    def hr_spacing(self) -> Fraction:
        return Fraction(self.latent_spacing, self.scale)

    @classmethod
    def for_profile(cls, profile: Profile) -> "LcnfConfig":
        if profile == Profile.PAPER:
            return cls(
                encoder_channels=128,
                residual_blocks=32,
                scale=6,
                crop=48,
                coords_per_step=2304,
                batch=5,
            )
        return cls()


class SimulationConfig(BaseModel):
    """
    Everything needed to synthesise measurements and paired datasets.
    """

    model_config = ConfigDict(extra="forbid")

    system: OpticalSystem = Field(default_factory=OpticalSystem)
    preprocess: PreprocessConfig = Field(
        default_factory=lambda: PreprocessConfig.for_profile(Profile.DESK)
    )
    scale: int = Field(3, ge=1)
    phase_range: tuple[float, float] = (-2.5, 6.5)
    max_absorption: float = Field(0.1, ge=0)
    max_illum_na: float = Field(MAX_ILLUMINATION_NA, gt=0)
    arc_count: int = Field(3, ge=1)
    led_spacing_na: float = Field(0.025, gt=0)
    sequential_led_count: int = Field(185, ge=1)
    photons: Optional[float] = Field(None, gt=0)
    train_count: int = Field(200, ge=0)
    val_count: int = Field(10, ge=0)
    test_count: int = Field(20, ge=0)

    @model_validator(mode="after")
    def check_ranges(self) -> "SimulationConfig":
        low, high = self.phase_range
        if high <= low:
            raise ValueError(f"phase_range must be increasing, got {self.phase_range}")
        if self.max_illum_na > MAX_ILLUMINATION_NA:
            raise ValueError(
                f"max_illum_na {self.max_illum_na} exceeds the board limit {MAX_ILLUMINATION_NA}"
            )
        if self.max_illum_na <= self.system.objective_na:
            raise ValueError("max_illum_na must exceed the objective NA")
        return self

    @property
    def hr_shape(self) -> tuple[int, int]:
        rows, cols = self.system.sensor_shape
        return rows * self.scale, cols * self.scale

    @property
    def hr_pitch_um(self) -> float:
        return self.system.object_pitch_um / self.scale

    @classmethod
    def for_profile(cls, profile: Profile) -> "SimulationConfig":
        if profile == Profile.PAPER:
            return cls(
                system=OpticalSystem(sensor_shape=(100, 100)),
                preprocess=PreprocessConfig.for_profile(Profile.PAPER),
                scale=6,
                train_count=800,
                val_count=50,
                test_count=50,
            )
        return cls()


class TilePlan(BaseModel):
    """
    Square tiles laid over a region; origins are (row, col) of each tile's top-left pixel.
    An optional circular field of view restricts which pixels must be covered.
    """

    model_config = ConfigDict(extra="forbid")

    region_shape: tuple[int, int]
    tile_size: int = Field(gt=0)
    overlap: int = Field(ge=0)
    origins: list[tuple[int, int]]
    fov_diameter: Optional[int] = Field(None, gt=0)

    @model_validator(mode="after")
    def check_plan(self) -> "TilePlan":
        if self.overlap >= self.tile_size:
            raise ValueError("overlap must be smaller than the tile size")
        rows, cols = self.region_shape
        for row, col in self.origins:
            if row < 0 or col < 0 or row + self.tile_size > rows or col + self.tile_size > cols:
                raise ValueError(f"tile at {(row, col)} leaves the {self.region_shape} region")
        return self

    def scaled(self, factor: int) -> "TilePlan":
        """
        Map a measurement-domain plan onto the reconstruction grid.
        Args:
            factor: Integer upsampling factor of the reconstruction
        Returns:
            A plan with every length multiplied by factor
        """
        return TilePlan(
            region_shape=(self.region_shape[0] * factor, self.region_shape[1] * factor),
            tile_size=self.tile_size * factor,
            overlap=self.overlap * factor,
            origins=[(row * factor, col * factor) for row, col in self.origins],
            fov_diameter=self.fov_diameter * factor if self.fov_diameter else None,
        )


class MetricReport(BaseModel):
    model_config = ConfigDict(extra="forbid", ser_json_inf_nan="constants")

    mse: float = Field(ge=0)
    psnr_db: float
    ssim: float = Field(ge=-1, le=1)
    fm: float = Field(ge=0, le=1)
    pred_id: str = ""
    ref_id: str = ""
    units: Literal["normalized", "radians"] = "normalized"
    config_hash: str = ""


class ArtifactRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    path: str
    kind: str
    sha256: Optional[str] = None


class ExperimentManifest(BaseModel):
    """
    One manifest per CLI run. It is written before any artifact and rewritten as artifacts land.
    """

    model_config = ConfigDict(extra="forbid")

    version: int = 1
    tool_version: str
    command: str
    config_hash: str
    config: dict
    seeds: list[int] = []
    dataset_index: Optional[str] = None
    command_history: list[str] = []
    artifacts: list[ArtifactRecord] = []
    # append-only files other runs also write to; listed without a checksum
    shared_outputs: list[str] = []
    status: Literal["running", "complete", "failed"] = "running"


class DatasetEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    inputs: list[str]
    target: str
    seed: int
    scale: int
    phase_scale: float
    phase_offset: float


class DatasetIndex(BaseModel):
    """
    JSON index of a dataset split: one entry per pair with paths relative to the index file.
    """

    model_config = ConfigDict(extra="forbid")

    version: int = 1
    split: str
    config_hash: str
    pairs: list[DatasetEntry] = []


class PatternRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = ""
    kind: Literal["brightfield", "darkfield"]
    leds: list[tuple[float, float]]
    image: str


class MeasurementIndex(BaseModel):
    """
    JSON index of a measurement set written by the simulate command.
    """

    model_config = ConfigDict(extra="forbid")

    version: int = 1
    mode: Literal["multiplexed", "sequential"]
    system: OpticalSystem
    patterns: list[PatternRecord]
