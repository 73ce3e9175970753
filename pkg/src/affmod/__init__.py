"""Affine modifications and point transitivity on ``u*v = p`` in exact arithmetic."""

from .errors import AffmodError
from .fields import CC, GF, QQ, Approx, Mod, field_from_spec
from .parsing import parse
from .poly import Poly, PolyMap, VarContext, compose, diff, format_poly, gcd, substitute

__version__ = "0.1.0"

__all__ = [
    "AffmodError",
    "Approx",
    "CC",
    "GF",
    "Mod",
    "Poly",
    "PolyMap",
    "QQ",
    "VarContext",
    "compose",
    "diff",
    "field_from_spec",
    "format_poly",
    "gcd",
    "parse",
    "substitute",
]
