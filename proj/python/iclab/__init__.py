"""In-context regression with multi-head softmax attention (C++ core)."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
