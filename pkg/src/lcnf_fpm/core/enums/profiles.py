from enum import Enum


class Profile(Enum):
    PAPER = "paper"
    DESK = "desk"
