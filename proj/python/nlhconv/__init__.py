"""Block-operator tools for nonlocal homogenization limits on discrete complexes."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
