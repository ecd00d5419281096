"""Exact numerics for twisted shrinking targets a_n alpha - gamma on the circle."""

from .errors import InvalidInput, PrecisionError, Unsupported

__version__ = "0.1.0"

__all__ = ["InvalidInput", "PrecisionError", "Unsupported", "__version__"]
