import json
import sys
from functools import wraps
from typing import Callable

from pydantic import ValidationError

from lcnf_fpm.config import logger
from lcnf_fpm.core.enums import ExitCode
from lcnf_fpm.core.exceptions import (
    ConfigurationError,
    FileFormatError,
    LcnfException,
    NumericalError,
)


def exit_code_for(error: Exception) -> ExitCode:
    if isinstance(error, (ConfigurationError, ValidationError, FileFormatError)):
        return ExitCode.CONFIG_ERROR
    if isinstance(error, (NumericalError, FloatingPointError)):
        return ExitCode.NUMERIC_FAILURE
    if isinstance(error, LcnfException):
        return ExitCode.CONFIG_ERROR
    return ExitCode.UNEXPECTED


def handle_exceptions(func: Callable[..., int]) -> Callable[..., int]:
    """
    Turn exceptions raised by a CLI command into a structured stderr line and an exit code.
    """

    @wraps(func)
    def wrapper(*args, **kwargs) -> int:
        try:
            return func(*args, **kwargs)
        except Exception as e:
            logger.error(f"Error: {str(e)}", exc_info=e)
            details = getattr(e, "details", {})
            if isinstance(e, ValidationError):
                details = {"errors": json.loads(e.json())}
            payload = {
                "error": type(e).__name__,
                "message": str(e),
                "details": details,
            }
            print(json.dumps(payload, default=str), file=sys.stderr)
            return int(exit_code_for(e))

    return wrapper
