"""Circulant tournaments: composition structure and exact disconnection."""

__version__ = "0.1.0"
