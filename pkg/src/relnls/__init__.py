"""Relativistic Burgers-Schrodinger and NLS hierarchies: exact symbolic
construction and verification, plus a pseudospectral solver."""

from ._backend import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
