import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from lcnf_fpm.config import logger
from lcnf_fpm.core.enums import IlluminationKind
from lcnf_fpm.core.exceptions import ConfigurationError
from lcnf_fpm.core.schemas import MAX_ILLUMINATION_NA, OpticalSystem

# Relative tolerance on NA comparisons; lattice points land exactly on the disk edge.
NA_TOLERANCE = 1e-9


def classify_leds(leds: np.ndarray, system: OpticalSystem) -> IlluminationKind:
    """
    Decide whether a set of LEDs is brightfield or darkfield.
    Args:
        leds: (n, 2) array of (ux, uy) direction cosines over wavelength, 1/um
        system: Optical system providing NA and wavelength
    Returns:
        IlluminationKind of the set
    Raises:
        ConfigurationError: If the set is empty or mixes brightfield and darkfield LEDs
    """
    if len(leds) == 0:
        raise ConfigurationError("an illumination pattern needs at least one LED")
    na = np.hypot(leds[:, 0], leds[:, 1]) * system.wavelength_um
    inside = na <= system.objective_na * (1 + NA_TOLERANCE)
    if inside.all():
        return IlluminationKind.BRIGHTFIELD
    if not inside.any():
        return IlluminationKind.DARKFIELD
    raise ConfigurationError(
        "pattern mixes brightfield and darkfield LEDs",
        {"brightfield": int(inside.sum()), "darkfield": int((~inside).sum())},
    )


@dataclass(frozen=True)
class IlluminationPattern:
    leds: np.ndarray
    kind: IlluminationKind
    name: str = ""

    def __len__(self) -> int:
        return len(self.leds)

    def max_na(self, wavelength_um: float) -> float:
        return float(np.hypot(self.leds[:, 0], self.leds[:, 1]).max() * wavelength_um)

    @classmethod
    def from_leds(
        cls,
        leds: np.ndarray | list[tuple[float, float]],
        system: OpticalSystem,
        name: str = "",
        max_illum_na: float = MAX_ILLUMINATION_NA,
    ) -> "IlluminationPattern":
        array = np.asarray(leds, dtype=np.float64).reshape(-1, 2)
        kind = classify_leds(array, system)
        na = np.hypot(array[:, 0], array[:, 1]) * system.wavelength_um
        if na.max() > max_illum_na * (1 + NA_TOLERANCE):
            raise ConfigurationError(
                f"LED at NA {na.max():.4f} exceeds the maximum illumination NA {max_illum_na}",
                {"max_illum_na": max_illum_na},
            )
        array.setflags(write=False)
        return cls(leds=array, kind=kind, name=name)


def led_pixel_offset(u: np.ndarray | tuple[float, float], spacing: tuple[float, float]) -> tuple[tuple[int, int], float]:
    """
    Round an LED frequency to the nearest frequency-grid pixel.
    Args:
        u: (ux, uy) in 1/um
        spacing: (row, col) frequency spacing of the grid in 1/um
    Returns:
        ((row, col) integer shift, largest sub-pixel residual in pixels)
    """
    ux, uy = float(u[0]), float(u[1])
    exact = (uy / spacing[0], ux / spacing[1])
    shift = (int(round(exact[0])), int(round(exact[1])))
    residual = max(abs(exact[0] - shift[0]), abs(exact[1] - shift[1]))
    if residual > 0.25:
        logger.debug(f"LED {(ux, uy)} rounded to pixel shift {shift} with residual {residual:.3f} px")
    return shift, residual


def _lattice(radius_steps: int) -> np.ndarray:
    steps = np.arange(-radius_steps, radius_steps + 1)
    iy, ix = np.meshgrid(steps, steps, indexing="ij")
    return np.stack([ix.ravel(), iy.ravel()], axis=1)


def semicircle_and_arc_patterns(
    system: OpticalSystem,
    max_illum_na: float = MAX_ILLUMINATION_NA,
    arc_count: int = 3,
    spacing_na: float = 0.025,
) -> list[IlluminationPattern]:
    """
    Multiplexed patterns: two complementary brightfield half-disks and arc_count darkfield arcs.
    LEDs sit on one square lattice (spacing in NA units) shared by all patterns.
    The upper half-disk takes uy > 0 plus the uy = 0, ux >= 0 half-line.
    Arc k covers polar angles [k, k + 1) * 360 / arc_count degrees.
    Raises:
        ConfigurationError: If an arc would hold no darkfield LED
    """
    if arc_count < 1:
        raise ConfigurationError(f"arc_count must be at least 1, got {arc_count}")
    if max_illum_na <= system.objective_na:
        raise ConfigurationError(
            f"max_illum_na {max_illum_na} must exceed the objective NA {system.objective_na}"
        )
    if spacing_na <= 0:
        raise ConfigurationError(f"LED spacing must be positive, got {spacing_na}")

    steps = _lattice(int(math.ceil(max_illum_na / spacing_na)))
    points_na = steps * spacing_na
    na = np.hypot(points_na[:, 0], points_na[:, 1])
    leds = points_na / system.wavelength_um

    brightfield = na <= system.objective_na * (1 + NA_TOLERANCE)
    darkfield = (~brightfield) & (na <= max_illum_na * (1 + NA_TOLERANCE))
    upper = (steps[:, 1] > 0) | ((steps[:, 1] == 0) & (steps[:, 0] >= 0))
    angle = np.mod(np.arctan2(points_na[:, 1], points_na[:, 0]), 2 * np.pi)
    arc_index = np.minimum((angle / (2 * np.pi / arc_count)).astype(int), arc_count - 1)
    empty_arcs = np.flatnonzero(np.bincount(arc_index[darkfield], minlength=arc_count) == 0)
    if len(empty_arcs):
        raise ConfigurationError(
            f"arc_count {arc_count} leaves {len(empty_arcs)} darkfield arcs without LEDs",
            {"arc_count": arc_count, "empty_arcs": empty_arcs.tolist(), "darkfield_leds": int(darkfield.sum())},
        )

    patterns = [
        IlluminationPattern.from_leds(leds[brightfield & upper], system, "bf-upper", max_illum_na),
        IlluminationPattern.from_leds(leds[brightfield & ~upper], system, "bf-lower", max_illum_na),
    ]
    for arc in range(arc_count):
        members = darkfield & (arc_index == arc)
        patterns.append(
            IlluminationPattern.from_leds(leds[members], system, f"df-arc-{arc}", max_illum_na)
        )
    logger.info(
        f"Built {len(patterns)} multiplexed patterns with "
        f"{int(brightfield.sum())} brightfield and {int(darkfield.sum())} darkfield LEDs"
    )
    return patterns


def sequential_grid_pattern(
    system: OpticalSystem,
    led_count: int,
    max_illum_na: float = MAX_ILLUMINATION_NA,
    spacing_na: Optional[float] = None,
) -> list[IlluminationPattern]:
    """
    Single-LED patterns on a centred square lattice inside the max_illum_na disk.
    Args:
        system: Optical system
        led_count: Number of LEDs to return
        max_illum_na: Radius of the illumination disk in NA units
        spacing_na: Lattice spacing; by default the coarsest max_illum_na / m holding led_count points
    Returns:
        led_count patterns ordered by ascending |u| (ties by row, then column)
    """
    if led_count < 1:
        raise ConfigurationError(f"led_count must be at least 1, got {led_count}")

    if spacing_na is None:
        if led_count == 1:
            radius_steps, spacing_na = 0, max_illum_na
        else:
            radius_steps = 1
            while int((np.hypot(*_lattice(radius_steps).T) <= radius_steps + NA_TOLERANCE).sum()) < led_count:
                radius_steps += 1
            spacing_na = max_illum_na / radius_steps
    else:
        radius_steps = int(math.floor(max_illum_na / spacing_na + NA_TOLERANCE))

    steps = _lattice(radius_steps)
    radius2 = steps[:, 0] ** 2 + steps[:, 1] ** 2
    inside = np.sqrt(radius2) * spacing_na <= max_illum_na * (1 + NA_TOLERANCE)
    steps, radius2 = steps[inside], radius2[inside]
    if len(steps) < led_count:
        raise ConfigurationError(
            f"only {len(steps)} lattice LEDs fit inside NA {max_illum_na} at spacing {spacing_na}"
        )
    order = np.lexsort((steps[:, 0], steps[:, 1], radius2))[:led_count]

    patterns = []
    for rank, index in enumerate(order):
        u = steps[index] * spacing_na / system.wavelength_um
        patterns.append(IlluminationPattern.from_leds([tuple(u)], system, f"led-{rank:03d}", max_illum_na))
    return patterns
