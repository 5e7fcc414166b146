"""Numerical experiments with the Bers embedding of the universal Teichmueller space."""

__version__ = "0.1.0"
