from .exit_codes import ExitCode
from .illumination_kind import IlluminationKind
from .profiles import Profile
from .tensor_roles import TensorRole

__all__ = [
    "ExitCode",
    "IlluminationKind",
    "Profile",
    "TensorRole",
]
