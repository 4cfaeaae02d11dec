"""Asynchronous hierarchical federated learning simulator."""

from ._ahfl import *  # noqa: F401,F403
from ._ahfl import __doc__  # noqa: F401
