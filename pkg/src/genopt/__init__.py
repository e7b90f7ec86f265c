"""Generalized optimization over reverse-derivative categories."""

from .poly import MultiPoly, PolyMap, parse_poly, format_poly

__all__ = ["MultiPoly", "PolyMap", "parse_poly", "format_poly"]
