from enum import Enum


class TensorRole(Enum):
    PARAMETER = "parameter"
    ACTIVATION = "activation"
