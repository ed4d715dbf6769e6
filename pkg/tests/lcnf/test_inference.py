import numpy as np
import pytest

from lcnf_fpm.core.exceptions import ConfigurationError
from lcnf_fpm.core.schemas import AdamConfig, LcnfConfig
from lcnf_fpm.lcnf import LcnfModel, Trainer, bicubic_dpc_baseline, infer_grid, infer_normalized
from tests.fixtures.builders import make_pair


@pytest.fixture
def model(tiny_lcnf_config):
    return LcnfModel(tiny_lcnf_config)


@pytest.fixture
def inputs(rng):
    return rng.standard_normal((6, 4, 4))


class TestInference:

    def test_pixel_centres_are_shared_across_resolutions(self, tiny_lcnf_config, inputs):
        model = LcnfModel(tiny_lcnf_config.model_copy(update={"cell_decode": False}))

        fine = infer_normalized(model, inputs, (12, 12))
        coarse = infer_normalized(model, inputs, (4, 4))

        assert np.allclose(fine[1::3, 1::3], coarse, atol=1e-9)

    def test_arbitrary_output_shape(self, model, inputs):
        assert infer_normalized(model, inputs, (7, 5)).shape == (7, 5)

    def test_chunking_does_not_change_values(self, model, inputs):
        whole = infer_normalized(model, inputs, (8, 8))

        assert np.allclose(infer_normalized(model, inputs, (8, 8), chunk=5), whole)
        assert np.allclose(infer_normalized(model, inputs, (8, 8), chunk=5, jobs=2), whole)

    def test_radians(self, model, inputs):
        normalized = infer_normalized(model, inputs, (8, 8))

        assert np.allclose(infer_grid(model, inputs, (8, 8)), normalized * 9.0 - 2.5)

    def test_rejects_empty_grid(self, model, inputs):
        with pytest.raises(ConfigurationError):
            infer_normalized(model, inputs, (0, 8))

    def test_inference_leaves_no_gradients(self, model, inputs):
        infer_normalized(model, inputs, (8, 8))

        assert all(not parameter.grad.any() for parameter in model.parameters())


@pytest.fixture(scope="module")
def trained_model():
    # cell size feeds the decoder, so it is off for grids of different density to share one field
    config = LcnfConfig(
        encoder_channels=2,
        residual_blocks=1,
        mlp_hidden=8,
        mlp_layers=3,
        coords_per_step=16,
        crop=4,
        scale=2,
        batch=2,
        inference_chunk=256,
        cell_decode=False,
        adam=AdamConfig(lr=1e-2),
    )
    trainer = Trainer(LcnfModel(config))
    pairs = [make_pair(seed=k) for k in range(2)]
    for _ in range(60):
        trainer.step(pairs)
    return trainer.model, pairs[0].inputs


class TestTrainedField:

    def test_no_jump_across_latent_cells(self, trained_model):
        model, inputs = trained_model
        # 8x8 latents over 64x64 pixels: cell edges fall between pixels 8i - 1 and 8i
        field = infer_grid(model, inputs, (64, 64))
        crossing = np.zeros(63, dtype=bool)
        crossing[8 * np.arange(1, 8) - 1] = True

        for steps in (np.abs(np.diff(field, axis=1)), np.abs(np.diff(field, axis=0)).T):
            within = steps[:, ~crossing].max()
            assert within > 0
            assert steps[:, crossing].max() <= 5 * within

    def test_output_resolution_only_resamples_the_field(self, trained_model):
        model, inputs = trained_model

        coarse = infer_grid(model, inputs, (16, 16))
        fine = infer_grid(model, inputs, (32, 32))

        pooled = fine.reshape(16, 2, 16, 2).mean(axis=(1, 3))
        assert np.linalg.norm(pooled - coarse) / np.linalg.norm(coarse) < 0.05


class TestBicubicBaseline:

    def test_mean_phase_places_the_constant(self):
        inputs = np.zeros((6, 4, 3))

        baseline = bicubic_dpc_baseline(inputs, 2, 9.0, -2.5, mean_phase=2.0)

        assert baseline.shape == (8, 6)
        assert np.allclose(baseline, 0.5)

    def test_output_is_clipped(self):
        inputs = np.zeros((6, 4, 4))
        inputs[5] = 100.0

        assert np.allclose(bicubic_dpc_baseline(inputs, 3, 9.0, -2.5), 1.0)
