"""Differential characters and kernels of formal group laws over (Q(t), d/dt)."""

__version__ = "0.1.0"

from .basefield import RatFunc, T, format_ratfunc
from .characters import Character, CharacterSpace, character_space, dim_formula
from .diffring import DiffPoly, JetRing, JetVar, total_derive
from .groups import FormalGroupLaw, catalog, ga, gm, legendre, product
from .kernel import KernelReport, vectorial_extension_report

__all__ = [
    "__version__", "RatFunc", "T", "format_ratfunc", "Character", "CharacterSpace",
    "character_space", "dim_formula", "DiffPoly", "JetRing", "JetVar", "total_derive",
    "FormalGroupLaw", "catalog", "ga", "gm", "legendre", "product", "KernelReport",
    "vectorial_extension_report",
]
