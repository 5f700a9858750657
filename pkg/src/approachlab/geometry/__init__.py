"""Convex-geometric kernel: hulls, depth, trimmed sets, offset maxima."""

from .primitives import (
    PointCloud,
    as_points,
    dist_to_hull,
    dist_via_support,
    project_to_hull,
    support,
)
from .depth import (
    halfspace_depth,
    depth_with_direction,
    q_int_membership,
    qint_halfspaces_2d,
    qint_polygon_2d,
)
from .offsetmax import offmax, offmax_subset_monotonicity_check
from .trimmed import maximin_point, tv_closest_mean
from .hull2d import Hull2D, hull2d_insert, hull_stream, polygon_area, polygon_perimeter

__all__ = [
    "PointCloud",
    "as_points",
    "support",
    "dist_to_hull",
    "dist_via_support",
    "project_to_hull",
    "halfspace_depth",
    "depth_with_direction",
    "q_int_membership",
    "qint_halfspaces_2d",
    "qint_polygon_2d",
    "offmax",
    "offmax_subset_monotonicity_check",
    "tv_closest_mean",
    "maximin_point",
    "Hull2D",
    "hull2d_insert",
    "hull_stream",
    "polygon_area",
    "polygon_perimeter",
]
