"""Strands algebras, Type-D / A-infinity structures, and knot Floer pairings.

Everything is exact: coefficients live in the binary field F2 or the
polynomial ring F2[U].  No floating point anywhere.
"""

__version__ = "0.1.0"
