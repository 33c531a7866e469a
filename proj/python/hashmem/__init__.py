"""Python bindings for the HashMem simulator."""

from ._hashmem import *  # noqa: F401,F403
from ._hashmem import __doc__  # noqa: F401
