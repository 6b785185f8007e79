"""Walks on ordinals, the rho function, and finite conditions for Kurepa-tree forcing."""

from .csequences import make_family, validate_family
from .ordinals import Ordinal, format_ordinal, parse_ordinal
from .posets import P, Q, Q_c, Condition, compatible, validate_condition
from .walks import rho, walk

__all__ = [
    "Ordinal", "parse_ordinal", "format_ordinal",
    "make_family", "validate_family",
    "rho", "walk",
    "Condition", "Q", "P", "Q_c", "compatible", "validate_condition",
]
