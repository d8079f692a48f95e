"""Chemically aware unitary coupled cluster compilation, simulation and estimation."""

__version__ = "0.1.0"
