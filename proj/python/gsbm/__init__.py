"""Spectral toolkit for generalized stochastic block models."""

from ._core import *  # noqa: F401,F403
from ._core import GsbmError, IoError, NumericalError, ValidationError  # noqa: F401

__version__ = "0.1.0"
