import numpy as np
import pytest

from lcnf_fpm.nn import Tensor, check_gradients, functional as F, numerical_gradient, run_gradchecks


class TestGradcheck:

    def test_numerical_gradient_of_square(self):
        x = Tensor(np.array([1.0, -2.0]), requires_grad=True)

        gradient = numerical_gradient(lambda: F.sum(F.mul_const(x, x.data.copy())), x)

        assert np.allclose(gradient, [2.0, -4.0], atol=1e-6)

    def test_check_gradients_of_linear_map(self, rng):
        x = Tensor(rng.standard_normal((4, 3)), requires_grad=True)
        weight = Tensor(rng.standard_normal((2, 3)), requires_grad=True)
        bias = Tensor(rng.standard_normal(2), requires_grad=True)

        error = check_gradients(lambda: F.sum(F.linear(x, weight, bias)), [x, weight, bias])

        assert error < 1e-6

    def test_every_layer_passes(self):
        results = run_gradchecks()

        assert len(results) == 110
        assert len({result.layer for result in results}) == 11
        failing = [(r.layer, r.config_index, r.max_relative_error) for r in results if not r.passed]
        assert failing == []

    @pytest.mark.parametrize("layers", [["linear"], ["unfold3x3", "l1_loss"]])
    def test_layer_subset(self, layers):
        results = run_gradchecks(seed=3, configs=2, layers=layers)

        assert [r.layer for r in results] == [layer for layer in layers for _ in range(2)]
        assert all(r.passed for r in results)
