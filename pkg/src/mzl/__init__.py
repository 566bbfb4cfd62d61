"""Motivic zeta functions from resolution data, rational series with their
limit at infinity, lattice-point generating functions of cells, and jet
counts over finite fields used as an independent check."""

__version__ = "0.1.0"
