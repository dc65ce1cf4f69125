from enum import Enum
from typing import Tuple


class Role(Enum):
    """The random variables that can label an axis of a joint pmf"""

    X = "X"
    Y = "Y"
    Z = "Z"
    V = "V"
    W = "W"


SOURCE_ROLES: Tuple[Role, ...] = (Role.X, Role.Y, Role.Z)
"""Roles carried by every `ProblemSpec`, in axis order"""


WITNESS_ROLES: Tuple[Role, ...] = (Role.V, Role.X, Role.Y, Role.W, Role.Z)
"""Axis order of a full joint witness"""
