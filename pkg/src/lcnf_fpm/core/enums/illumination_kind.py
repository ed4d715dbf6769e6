from enum import Enum


class IlluminationKind(Enum):
    BRIGHTFIELD = "brightfield"
    DARKFIELD = "darkfield"
