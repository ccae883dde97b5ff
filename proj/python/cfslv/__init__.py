"""Commodity futures SLV pricing and GSCI index calibration."""

from cfslv._core import *  # noqa: F401,F403
from cfslv._core import __doc__  # noqa: F401

__version__ = "0.1.0"
