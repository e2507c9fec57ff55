"""Finite group laboratory: growth, identities, radicals and approximation experiments."""

from .groups import (
    CapExceeded, FiniteGroup, NotNormal, SubgroupMask, build, center, centralizer, closure,
    conjugacy_classes, element_order, exponent, normal_closure, quotient,
)
from .perm import Permutation
from .specs import GroupSpec, parse_spec

__version__ = "0.1.0"

__all__ = [
    "CapExceeded", "FiniteGroup", "GroupSpec", "NotNormal", "Permutation", "SubgroupMask",
    "build", "center", "centralizer", "closure", "conjugacy_classes", "element_order",
    "exponent", "normal_closure", "parse_spec", "quotient",
]
