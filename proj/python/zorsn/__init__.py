"""Zeroth-order randomized subspace Newton methods (C++ core)."""

from ._zorsn import *  # noqa: F401,F403
from ._zorsn import __doc__  # noqa: F401
