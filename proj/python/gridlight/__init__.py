"""Pushdown-optimizing query engine for gridded binary datasets."""

try:
    from ._gridlight import *  # noqa: F401,F403
    from ._gridlight import __version__  # noqa: F401
except ImportError:  # running against a build tree where the module is loose
    from _gridlight import *  # noqa: F401,F403
    from _gridlight import __version__  # noqa: F401
