"""Multipath-assisted indoor navigation and tracking with UWB signals."""

from mintuwb._core import *  # noqa: F401,F403
from mintuwb._core import __doc__  # noqa: F401
