"""Common break estimation in panel data.

Least squares and maximum likelihood break estimators, limiting-law
simulation, and adaptive resampling confidence intervals, backed by the
C++ core.
"""

try:
    from ._panelbreak import *  # noqa: F401,F403
    from ._panelbreak import __doc__ as _core_doc  # noqa: F401
except ImportError:  # build-tree layout: extension next to this package
    from _panelbreak import *  # noqa: F401,F403

__version__ = "0.1.0"
