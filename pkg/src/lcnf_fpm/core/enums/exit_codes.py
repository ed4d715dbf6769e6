from enum import IntEnum


class ExitCode(IntEnum):
    SUCCESS = 0
    UNEXPECTED = 1
    CONFIG_ERROR = 2
    NUMERIC_FAILURE = 3
