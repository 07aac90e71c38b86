# coding: utf-8

"""
Views of a recorded frame in its grid frame, rotation augmentation and
temporal point-cloud concatenation.

Actors and futures are stored in world coordinates together with the ego
pose. The grid frame of a frame is the ego pose, or the rotated pose left
by rotation_augment under "grid_pose"; everything drawn on the grid goes
through grid_pose.
"""

import logging

import numpy as np

from fleetplan.geometry import rotation, to_local, to_world, wrap
from fleetplan.perception.pillars import GridSpec, rotate_points

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)


def grid_pose(frame):
    """
    World pose (x, y, yaw) of the grid frame of a frame.
    """
    return np.asarray(frame.get("grid_pose", frame["ego_pose"]), dtype=float)


def local_actors(frame):
    """
    Actor rows (A, 8) with position and yaw in the grid frame.
    """
    rows = np.array(frame["actors"], dtype=float, copy=True).reshape(-1, 8)
    pose = grid_pose(frame)
    rows[:, 2:4] = to_local(rows[:, 2:4], pose)
    rows[:, 4] = wrap(rows[:, 4] - pose[2])
    return rows


def local_futures(frame):
    """
    Future positions (A, n, 2) in the grid frame; truncated steps stay NaN.
    """
    return to_local(np.asarray(frame["futures"], dtype=float),
                    grid_pose(frame))


def rotate_raster(raster, theta, spec):
    """
    Nearest-cell rotation of (k, H, W) rasters about the ego origin by
    theta. Cells rotated in from outside the grid are 0.
    """
    raster = np.asarray(raster)
    if theta == 0:
        return raster.copy()
    h, w = spec.shape
    rows, cols = np.mgrid[0:h, 0:w]
    src = spec.cell_center(rows, cols) @ rotation(theta)
    r, c, inside = spec.cell_index(src)
    out = np.zeros_like(raster)
    out[:, inside] = raster[:, r[inside], c[inside]]
    return out


def rotation_augment(frame, theta, spec=None):
    """
    Rotates a frame about the ego by theta: points, rasters and the goal
    directly, actors, boxes and trajectories through the grid pose.

    Returns:
        a new frame dict; the input is left untouched.
    """
    spec = spec or GridSpec()
    out = dict(frame)
    if theta == 0:
        return out
    out["points"] = rotate_points(frame["points"], theta)
    if "ego_goal" in frame:
        out["ego_goal"] = rotation(theta) @ np.asarray(frame["ego_goal"],
                                                       dtype=float)
    if "sem_rasters" in frame:
        out["sem_rasters"] = rotate_raster(frame["sem_rasters"], theta, spec)
    pose = grid_pose(frame)
    out["grid_pose"] = np.array([pose[0], pose[1],
                                 float(wrap(pose[2] - theta))])
    return out


def stack_scans(frames):
    """
    Concatenates the scans of consecutive frames, oldest first, into the
    frame of the last one using the EKF poses.

    Returns:
        (points (N, 4), point_scores (N, 5))
    """
    current = frames[-1]
    pose = current.get("ekf_pose", current["ego_pose"])
    points, scores = [], []
    for fr in frames:
        p = np.array(fr["points"], dtype=np.float32, copy=True)
        if fr is not current and len(p):
            src = fr.get("ekf_pose", fr["ego_pose"])
            p[:, :2] = to_local(to_world(p[:, :2], src), pose)
        points.append(p)
        scores.append(np.asarray(fr["point_scores"], dtype=np.float32))
    return np.concatenate(points), np.concatenate(scores)
