"""Incrementally maintained 2-D convex hull with area/perimeter tracking."""

from dataclasses import dataclass

import numpy as np

from .. import _kernels
from ..errors import EmptyHull


def polygon_area(vertices) -> float:
    v = np.atleast_2d(np.asarray(vertices, dtype=np.float64))
    if v.shape[0] < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    return float(0.5 * abs(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)))


def polygon_perimeter(vertices) -> float:
    """Boundary length; a degenerate segment counts both sides (2 * length)."""
    v = np.atleast_2d(np.asarray(vertices, dtype=np.float64))
    if v.shape[0] < 2:
        return 0.0
    if v.shape[0] == 2:
        return float(2.0 * np.linalg.norm(v[1] - v[0]))
    return float(np.sum(np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)))


@dataclass(frozen=True)
class Hull2D:
    """CCW-ordered convex polygon; degenerate hulls have 1 or 2 vertices."""

    vertices: np.ndarray
    area: float
    perimeter: float

    @staticmethod
    def empty() -> "Hull2D":
        return Hull2D(np.zeros((0, 2)), 0.0, 0.0)

    @staticmethod
    def from_points(points) -> "Hull2D":
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if pts.shape[0] == 0:
            return Hull2D.empty()
        v = _kernels.convex_hull_2d(pts)
        return Hull2D(v, polygon_area(v), polygon_perimeter(v))

    def __len__(self):
        return self.vertices.shape[0]

    def contains(self, x, tol=1e-9) -> bool:
        if len(self) == 0:
            return False
        return bool(_kernels.points_in_hull_2d(np.asarray(x, dtype=np.float64)[None, :],
                                               self.vertices, tol)[0])

    def distance(self, x) -> float:
        if len(self) == 0:
            raise EmptyHull("distance from an empty hull is undefined")
        return float(_kernels.point_hull_distance_2d(np.asarray(x, dtype=np.float64),
                                                     self.vertices))

    def project(self, x) -> np.ndarray:
        if len(self) == 0:
            raise EmptyHull("projection onto an empty hull is undefined")
        return _kernels.project_to_hull_2d(np.asarray(x, dtype=np.float64), self.vertices)


def hull2d_insert(hull: Hull2D, x) -> tuple[float, Hull2D]:
    """Insert a point; returns (distance to the hull before insertion, new hull).

    The first point initializes a degenerate hull at distance 0. Area and
    perimeter are monotone along any insertion stream.
    """
    x = np.asarray(x, dtype=np.float64)
    if len(hull) == 0:
        return 0.0, Hull2D(x[None, :].copy(), 0.0, 0.0)
    d = hull.distance(x)
    if d <= 0.0:
        return 0.0, hull
    v = _kernels.convex_hull_2d(np.vstack([hull.vertices, x[None, :]]))
    return d, Hull2D(v, polygon_area(v), polygon_perimeter(v))


def hull_stream(points) -> tuple[np.ndarray, Hull2D]:
    """Bulk insertion of a point stream through the compiled kernel.

    Returns the per-point distances-before-insertion and the final hull.
    """
    pts = np.ascontiguousarray(np.atleast_2d(np.asarray(points, dtype=np.float64)))
    dists, verts = _kernels.hull_stream_2d(pts)
    return dists, Hull2D(verts, polygon_area(verts), polygon_perimeter(verts))
