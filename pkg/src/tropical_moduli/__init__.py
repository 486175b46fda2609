"""Exact rational homology of tropical moduli spaces of marked curves."""

__version__ = "0.1.0"
