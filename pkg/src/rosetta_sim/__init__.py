"""Desk-scale simulator for quantum-enhanced interferometry."""

__version__ = "0.1.0"
