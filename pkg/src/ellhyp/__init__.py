"""Elliptic hypergeometric functions and machine-checked residuals of their identities."""
from ._backend import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
