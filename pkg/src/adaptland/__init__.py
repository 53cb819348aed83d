"""Closed-loop physiological mitigation on NK fitness landscapes."""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
