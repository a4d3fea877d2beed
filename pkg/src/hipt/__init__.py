"""Hierarchical population training for a two-player cooperative kitchen."""

__version__ = "0.1.0"
