from typing import Any, Optional


class LcnfException(Exception):
    def __init__(self, message: str, details: Optional[dict[str, Any]] = None):
        super().__init__(message)
        self.details = details or {}


class ConfigurationError(LcnfException):
    pass


class GridSupportError(ConfigurationError):
    pass


class ShapeMismatchError(LcnfException):
    pass


class PhysicsModelError(LcnfException):
    pass


class NumericalError(LcnfException):
    pass


class FileFormatError(LcnfException):
    pass


class CoverageError(LcnfException):
    pass
