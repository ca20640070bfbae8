"""Desk-scale laboratory for hybrid classical-quantum tree search on SAT."""

__version__ = "0.1.0"
