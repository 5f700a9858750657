"""2-D geometry kernels with a compiled core and a pure-Python fallback.

The compiled module is preferred when importable; set
``APPROACHLAB_PURE_PYTHON=1`` to force the numpy fallback (used by the
equivalence tests and the kernel benchmark).
"""

import os

from . import _ref

if os.environ.get("APPROACHLAB_PURE_PYTHON") == "1":
    _impl = _ref
    BACKEND = "python"
else:
    try:
        from . import _fast as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _ref
        BACKEND = "python"

convex_hull_2d = _impl.convex_hull_2d
point_hull_distance_2d = _impl.point_hull_distance_2d
project_to_hull_2d = _impl.project_to_hull_2d
points_in_hull_2d = _impl.points_in_hull_2d
halfspace_depth_2d = _impl.halfspace_depth_2d
hull_stream_2d = _impl.hull_stream_2d

__all__ = [
    "BACKEND",
    "convex_hull_2d",
    "point_hull_distance_2d",
    "project_to_hull_2d",
    "points_in_hull_2d",
    "halfspace_depth_2d",
    "hull_stream_2d",
]
