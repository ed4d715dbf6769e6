from . import functional
from .gradcheck import GradcheckResult, check_gradients, numerical_gradient, run_gradchecks
from .init import kaiming_uniform
from .modules import Conv2d3x3, Linear, Mlp, Module, ResidualBlock
from .optim import AdamState, PlateauSchedule, adam_step, plateau_update
from .tensor import Tensor, backward, is_grad_enabled, no_grad
