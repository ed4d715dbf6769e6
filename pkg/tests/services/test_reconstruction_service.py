import csv

import numpy as np
import pytest

from lcnf_fpm.api.requests import DpcRequest, FpmRequest
from lcnf_fpm.core.exceptions import FileFormatError
from lcnf_fpm.core.schemas import FpmConfig
from lcnf_fpm.io import read_float_image, write_measurements
from lcnf_fpm.optics import semicircle_and_arc_patterns, sequential_grid_pattern
from lcnf_fpm.services import ReconstructionService
from lcnf_fpm.services.reconstruction_service import write_loss_csv
from lcnf_fpm.simulation import generate_phantom, simulate_patterns, simulate_sequential


@pytest.fixture
def service():
    return ReconstructionService()


@pytest.fixture
def multiplexed_index(small_system, tmp_path):
    patterns = semicircle_and_arc_patterns(small_system)
    obj = generate_phantom(2, (48, 48), phase_range=(-0.3, 0.3), pitch=small_system.object_pitch_um / 3)
    index_path, _ = write_measurements(
        simulate_patterns(obj, small_system, patterns, 3), tmp_path / "multiplexed", "multiplexed"
    )
    return index_path


@pytest.fixture
def sequential_index(fpm_system, tmp_path):
    patterns = sequential_grid_pattern(fpm_system, 9, max_illum_na=0.1)
    obj = generate_phantom(6, (32, 32), phase_range=(-0.3, 0.3), max_absorption=0.05, pitch=1.25)
    index_path, _ = write_measurements(
        simulate_sequential(obj, fpm_system, patterns, 2), tmp_path / "sequential", "sequential"
    )
    return index_path


class TestDpc:

    def test_phase_from_brightfield_pair(self, service, writer, multiplexed_index):
        summary = service.dpc(DpcRequest(measurements=str(multiplexed_index)), writer)

        phase = read_float_image(writer.out_dir / "dpc_phase.pfm")
        assert summary["brightfield_images"] == 2
        assert phase.shape == (16, 16)
        assert np.isfinite(phase).all()
        assert summary["phase_max"] > summary["phase_min"]
        assert (writer.out_dir / "dpc_phase_spectrum.png").exists()

    def test_missing_index_raises(self, service, writer, tmp_path):
        with pytest.raises(FileFormatError):
            service.dpc(DpcRequest(measurements=str(tmp_path / "nowhere.json")), writer)


class TestFpm:

    def test_writes_field_pupil_and_history(self, service, writer, sequential_index):
        request = FpmRequest(measurements=str(sequential_index), fpm=FpmConfig(epochs=3))

        summary = service.fpm(request, writer)

        assert summary["epochs"] == 3
        assert summary["object_shape"] == [32, 32]
        assert np.iscomplexobj(read_float_image(writer.out_dir / "object_field.pfm"))
        with open(writer.out_dir / "loss_history.csv", newline="") as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["index", "objective"]
        assert len(rows) == 5
        assert float(rows[-1][1]) == pytest.approx(summary["final_objective"])


class TestWriteLossCsv:

    def test_values_round_trip_exactly(self, tmp_path):
        path = write_loss_csv(tmp_path / "loss.csv", [0.1, 1 / 3])

        with open(path, newline="") as handle:
            rows = list(csv.reader(handle))

        assert rows == [["index", "loss"], ["0", "0.1"], ["1", repr(1 / 3)]]
