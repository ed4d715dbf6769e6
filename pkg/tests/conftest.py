import numpy as np
import pytest

from lcnf_fpm.config import setup_logger
from lcnf_fpm.core.schemas import LcnfConfig, OpticalSystem, SimulationConfig
from tests.fixtures.builders import make_pair

setup_logger(disable_logging=True)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def desk_system():
    """
    Description: The default desk-scale microscope (NA 0.1, 1.625 um object pitch, 32x32 sensor).
    """
    return OpticalSystem()


@pytest.fixture
def small_system():
    """
    Description: Desk optics on a 16x16 sensor, small enough for full multiplexed simulations.
    """
    return OpticalSystem(sensor_shape=(16, 16))


@pytest.fixture
def fine_system():
    """
    Description: An 8x magnification system whose 0.8125 um pitch holds the full brightfield
    correlation band on the sensor grid.
    """
    return OpticalSystem(magnification=8.0, sensor_shape=(32, 32))


@pytest.fixture
def fpm_system():
    """
    Description: A 2x system with 2.5 um object pitch for fast sequential FPM runs on 16x16 frames.
    """
    return OpticalSystem(magnification=2.0, camera_pixel_um=5.0, sensor_shape=(16, 16))


@pytest.fixture
def small_simulation_config(small_system):
    """
    Description: Simulation settings producing 16x16 inputs and 48x48 targets.
    """
    return SimulationConfig(system=small_system, scale=3, train_count=2, val_count=1, test_count=1)


@pytest.fixture
def tiny_lcnf_config():
    """
    Description: A network small enough to train for a few steps inside a unit test.
    """
    return LcnfConfig(
        encoder_channels=2,
        residual_blocks=1,
        mlp_hidden=8,
        mlp_layers=3,
        coords_per_step=16,
        crop=4,
        scale=2,
        batch=2,
        epochs=2,
        inference_chunk=64,
    )


@pytest.fixture
def tiny_pair():
    """
    Description: One random 8x8 input stack with a smooth 16x16 target at scale 2.
    """
    return make_pair(rows=8, cols=8, scale=2, seed=7)
