"""Finite-domain analysis of safe manipulations in mechanisms."""
__version__ = "0.1.0"
