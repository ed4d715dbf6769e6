import numpy as np
import pytest

from lcnf_fpm.core.enums import TensorRole
from lcnf_fpm.core.exceptions import NumericalError, ShapeMismatchError
from lcnf_fpm.nn import Tensor, backward, functional as F, is_grad_enabled, no_grad


class TestTape:

    def test_backward_needs_scalar(self):
        x = Tensor(np.ones(3), requires_grad=True)

        with pytest.raises(ShapeMismatchError):
            backward(F.scale(x, 2.0))

    def test_shared_input_accumulates(self):
        x = Tensor(np.array([1.0, -2.0, 3.0]), requires_grad=True)

        backward(F.sum(F.add(x, x)))

        assert np.array_equal(x.grad, [2.0, 2.0, 2.0])

    def test_no_grad_stops_recording(self):
        x = Tensor(np.ones(2), requires_grad=True)

        with no_grad():
            assert not is_grad_enabled()
            y = F.add(x, x)

        assert is_grad_enabled()
        assert not y.requires_grad

    def test_constant_inputs_record_nothing(self):
        y = F.scale(Tensor(np.ones(2)), 3.0)

        assert not y.requires_grad
        assert y.op == "scale"

    def test_non_finite_forward_raises(self):
        with pytest.raises(NumericalError) as e:
            F.scale(Tensor(np.ones(2)), np.inf)

        assert e.value.details["op"] == "scale"

    def test_gradient_shape_is_checked(self):
        x = Tensor(np.zeros(3), requires_grad=True)

        with pytest.raises(ShapeMismatchError):
            x.accumulate(np.zeros(2))

    def test_parameter_role(self):
        weight = Tensor.parameter(np.zeros((2, 2)), name="w")

        assert weight.role == TensorRole.PARAMETER
        assert weight.requires_grad
        assert np.array_equal(weight.grad, np.zeros((2, 2)))
        assert Tensor(np.ones(1) * 4.0).item() == 4.0
