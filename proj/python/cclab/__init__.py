"""Couplings, 1-D transport distances and exceedance bounds.

The heavy lifting lives in the compiled extension; this package re-exports
its surface. See the README for the matching `cclab` command line tool.
"""

from ._cclab import *  # noqa: F401,F403
from ._cclab import __version__  # noqa: F401
