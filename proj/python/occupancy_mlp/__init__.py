"""Occupancy estimation from indoor CO2, humidity and temperature."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401

__version__ = "0.1.0"
