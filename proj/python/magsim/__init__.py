"""Coupled-magnet actuator simulation and state-estimation toolkit."""

from magsim._core import *  # noqa: F401,F403
from magsim._core import __doc__  # noqa: F401
