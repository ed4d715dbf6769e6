from .exceptions import (
    ConfigurationError,
    CoverageError,
    FileFormatError,
    GridSupportError,
    LcnfException,
    NumericalError,
    PhysicsModelError,
    ShapeMismatchError,
)
from .schemas import *
from .decorators import exit_code_for, handle_exceptions
