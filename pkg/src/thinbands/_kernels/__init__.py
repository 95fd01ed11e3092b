"""Hot loops: the compiled extension when it was built, else pure Python.

Set ``THINBANDS_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels
if os.environ.get("THINBANDS_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

iet_orbit = _impl.iet_orbit
gamma_bfs = _impl.gamma_bfs
trace_curve = _impl.trace_curve

TRACE_OK = _pykernels.TRACE_OK
TRACE_CLOSED = _pykernels.TRACE_CLOSED
TRACE_VERTEX = _pykernels.TRACE_VERTEX
BFS_OK = _pykernels.BFS_OK
BFS_CRITICAL = _pykernels.BFS_CRITICAL

__all__ = [
    "BACKEND",
    "iet_orbit",
    "gamma_bfs",
    "trace_curve",
    "TRACE_OK",
    "TRACE_CLOSED",
    "TRACE_VERTEX",
    "BFS_OK",
    "BFS_CRITICAL",
]
