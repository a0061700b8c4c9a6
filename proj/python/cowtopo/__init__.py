"""Python bindings for the cowtopo C++ core.

Arrays are (z, y, x) ordered; spacings are (dz, dy, dx) in mm.
"""

from ._core import *  # noqa: F401,F403
from ._core import CLASS_NAMES, IoError, ValidationError  # noqa: F401

__version__ = "0.1.0"
