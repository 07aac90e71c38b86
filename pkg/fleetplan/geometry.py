# coding: utf-8

"""
Planar geometry shared by the simulator, the detector targets and the
collision gate: SE(2) frame changes, oriented rectangles, separating-axis
overlap tests and vectorized ray casting against line segments.

Poses are (x, y, yaw) with yaw counter-clockwise from +x. Local frames have
+x pointing forward and +y to the left.
"""

import numpy as np

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"


def rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def to_local(points, pose):
    """
    Expresses world points (..., 2) in the frame of pose (x, y, yaw).
    """
    points = np.asarray(points, dtype=float)
    x, y, yaw = pose[0], pose[1], pose[2]
    c, s = np.cos(yaw), np.sin(yaw)
    dx = points[..., 0] - x
    dy = points[..., 1] - y
    return np.stack([c * dx + s * dy, -s * dx + c * dy], axis=-1)


def to_world(points, pose):
    """
    Inverse of to_local.
    """
    points = np.asarray(points, dtype=float)
    x, y, yaw = pose[0], pose[1], pose[2]
    c, s = np.cos(yaw), np.sin(yaw)
    px, py = points[..., 0], points[..., 1]
    return np.stack([c * px - s * py + x, s * px + c * py + y], axis=-1)


def pose_to_local(pose, frame):
    """
    Expresses a pose (x, y, yaw) in another pose's frame.
    """
    xy = to_local(np.asarray(pose[:2]), frame)
    return np.array([xy[0], xy[1], wrap(pose[2] - frame[2])])


def wrap(a):
    return (np.asarray(a) + np.pi) % (2 * np.pi) - np.pi


def box_corners(x, y, yaw, hl, hw):
    """
    Corners of oriented rectangles, counter-clockwise starting front-left.
    Arguments broadcast; the result has shape (..., 4, 2).
    """
    x, y, yaw, hl, hw = np.broadcast_arrays(*[np.asarray(v, dtype=float)
                                              for v in (x, y, yaw, hl, hw)])
    c, s = np.cos(yaw), np.sin(yaw)
    lx = np.stack([hl, -hl, -hl, hl], axis=-1)
    ly = np.stack([hw, hw, -hw, -hw], axis=-1)
    cx = x[..., None] + c[..., None] * lx - s[..., None] * ly
    cy = y[..., None] + s[..., None] * lx + c[..., None] * ly
    return np.stack([cx, cy], axis=-1)


def _project(corners, axes):
    # corners (..., 4, 2), axes (..., A, 2) -> (..., A, 4)
    return np.einsum("...ad,...kd->...ak", axes, corners)


def _edge_normals(corners):
    e = np.roll(corners, -1, axis=-2) - corners
    return np.stack([-e[..., :2, 1], e[..., :2, 0]], axis=-1)


def rectangles_overlap(a, b):
    """
    Separating-axis test for convex quadrilaterals. a and b are corner
    arrays (..., 4, 2) that broadcast together. Touching counts as overlap.

    Returns:
        bool array of the broadcast batch shape.
    """
    a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
    axes = np.concatenate([_edge_normals(a), _edge_normals(b)], axis=-2)
    pa = _project(a, axes)
    pb = _project(b, axes)
    separated = (pa.max(-1) < pb.min(-1)) | (pb.max(-1) < pa.min(-1))
    return ~separated.any(-1)


def points_in_rectangle(points, x, y, yaw, hl, hw):
    """
    Mask of points (N, 2) lying inside one oriented rectangle.
    """
    local = to_local(points, (x, y, yaw))
    return (np.abs(local[..., 0]) <= hl) & (np.abs(local[..., 1]) <= hw)


def rectangle_segments(corners):
    """
    The four edges of each rectangle, (..., 4, 2, 2).
    """
    return np.stack([corners, np.roll(corners, -1, axis=-2)], axis=-2)


def ray_cast(origin, directions, segments, max_range=np.inf):
    """
    Distance along each unit ray to the nearest segment.

    Args:
        origin: (2,) ray origin.
        directions: (R, 2) unit direction vectors.
        segments: (S, 2, 2) segment endpoints.
        max_range: rays hitting nothing closer report inf.

    Returns:
        (distances (R,), segment index (R,) or -1)
    """
    directions = np.asarray(directions, dtype=float)
    segments = np.asarray(segments, dtype=float).reshape(-1, 2, 2)
    r = len(directions)
    if len(segments) == 0 or r == 0:
        return np.full(r, np.inf), np.full(r, -1, dtype=int)
    p = segments[:, 0] - np.asarray(origin, dtype=float)
    e = segments[:, 1] - segments[:, 0]
    d = directions[:, None, :]
    denom = d[..., 0] * e[None, :, 1] - d[..., 1] * e[None, :, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (p[None, :, 0] * e[None, :, 1] - p[None, :, 1] * e[None, :, 0]) \
            / denom
        u = (p[None, :, 0] * d[..., 1] - p[None, :, 1] * d[..., 0]) / denom
    valid = (np.abs(denom) > 1e-12) & (t > 1e-9) & (u >= 0) & (u <= 1) & \
        (t <= max_range)
    t = np.where(valid, t, np.inf)
    idx = np.argmin(t, axis=1)
    dist = t[np.arange(r), idx]
    idx = np.where(np.isfinite(dist), idx, -1)
    return dist, idx


class Polyline(object):
    """
    A 2D polyline parametrized by arc length.
    """

    def __init__(self, points):
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != 2 or len(points) < 2:
            raise ValueError("A polyline needs at least two 2D points")
        keep = np.concatenate([[True], np.linalg.norm(np.diff(points, axis=0),
                                                      axis=1) > 1e-9])
        self.points = points[keep]
        seg = np.linalg.norm(np.diff(self.points, axis=0), axis=1)
        self.s = np.concatenate([[0.0], np.cumsum(seg)])

    @property
    def length(self):
        return float(self.s[-1])

    def interpolate(self, s):
        """
        Position (..., 2) and heading (...) at arc lengths s (clamped).
        """
        s = np.clip(np.asarray(s, dtype=float), 0.0, self.length)
        i = np.clip(np.searchsorted(self.s, s, side="right") - 1, 0,
                    len(self.s) - 2)
        d = self.points[i + 1] - self.points[i]
        seg = self.s[i + 1] - self.s[i]
        t = ((s - self.s[i]) / seg)[..., None]
        xy = self.points[i] + t * d
        return xy, np.arctan2(d[..., 1], d[..., 0])

    def project(self, xy, s_min=None, s_max=None):
        """
        Closest point on the polyline restricted to [s_min, s_max].

        Returns:
            (arc length, signed lateral offset, positive to the left)
        """
        xy = np.asarray(xy, dtype=float)
        a = self.points[:-1]
        d = self.points[1:] - a
        seg2 = np.maximum((d ** 2).sum(1), 1e-12)
        t = np.clip(((xy - a) * d).sum(1) / seg2, 0.0, 1.0)
        s = self.s[:-1] + t * np.sqrt(seg2)
        lo = -np.inf if s_min is None else s_min
        hi = np.inf if s_max is None else s_max
        s = np.clip(s, lo, hi)
        s = np.clip(s, self.s[:-1], self.s[1:])
        foot = a + ((s - self.s[:-1]) / np.sqrt(seg2))[:, None] * d
        dist = np.linalg.norm(xy - foot, axis=1)
        ok = (self.s[1:] >= lo) & (self.s[:-1] <= hi)
        dist = np.where(ok, dist, np.inf)
        i = int(np.argmin(dist))
        cross = d[i, 0] * (xy[1] - foot[i, 1]) - d[i, 1] * (xy[0] - foot[i, 0])
        return float(s[i]), float(np.sign(cross) * dist[i])

    def resample(self, step):
        n = max(int(np.ceil(self.length / step)), 1)
        xy, _ = self.interpolate(np.linspace(0.0, self.length, n + 1))
        return xy
