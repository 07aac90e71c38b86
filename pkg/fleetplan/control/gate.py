# coding: utf-8

"""
Multi-modal collision gating: the ego plan is checked against every
sufficiently likely plan of every other vehicle, timestep by timestep, with
oriented footprints.
"""

import logging

import numpy as np

from fleetplan.geometry import box_corners, rectangles_overlap, to_world

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)


class NeighbourPlans(object):
    """
    Plans of one other vehicle.

    Args:
        pose ((3,) or None): pose in the ego frame.
        extent ((hl, hw)): half extents.
        trajectories ((C, n, 2)): per-command plans in the vehicle's frame.
        likelihoods ((C,)): command likelihoods.
    """

    def __init__(self, pose, extent, trajectories, likelihoods, actor_id=-1):
        self.pose = None if pose is None else np.asarray(pose, dtype=float)
        self.extent = tuple(float(v) for v in extent)
        self.trajectories = np.asarray(trajectories, dtype=float)
        self.likelihoods = np.asarray(likelihoods, dtype=float)
        self.actor_id = actor_id


class GateDecision(object):

    def __init__(self, hard_stop=False, culprits=None):
        self.hard_stop = bool(hard_stop)
        self.culprits = culprits or []

    def as_dict(self):
        return {"hard_stop": self.hard_stop,
                "culprits": [list(c) for c in self.culprits]}

    def __bool__(self):
        return self.hard_stop

    __nonzero__ = __bool__


def trajectory_poses(xy, start_yaw=0.0, origin=(0.0, 0.0)):
    """
    Poses (n, 3) along a trajectory. Headings follow the displacement from
    the previous point; standing still keeps the previous heading.
    """
    xy = np.asarray(xy, dtype=float).reshape(-1, 2)
    prev = np.vstack([np.asarray(origin, dtype=float)[None], xy[:-1]])
    d = xy - prev
    yaw = np.empty(len(xy))
    last = float(start_yaw)
    for k in range(len(xy)):
        if np.hypot(*d[k]) > 1e-3:
            last = float(np.arctan2(d[k, 1], d[k, 0]))
        yaw[k] = last
    return np.column_stack([xy, yaw])


def footprints(poses, extent, inflation=0.0):
    poses = np.asarray(poses, dtype=float)
    return box_corners(poses[:, 0], poses[:, 1], poses[:, 2],
                       extent[0] + inflation, extent[1] + inflation)


def collision_gate(ego_tau, neighbours, threshold=0.2, inflation=0.25,
                   ego_extent=(2.25, 1.0)):
    """
    Args:
        ego_tau ((n, 2)): refined ego plan in the ego frame.
        neighbours ([NeighbourPlans]): other vehicles.
        threshold (float): plans with a likelihood above this are checked.
        inflation (float): margin added to every half extent.

    Returns:
        GateDecision; culprits are (actor_id, command, timestep).
    """
    ego_poses = trajectory_poses(ego_tau)
    ego_boxes = footprints(ego_poses, ego_extent, inflation)
    culprits = []
    for nb in neighbours:
        if nb.pose is None:
            logger.warning("Skipping detection {} without a pose".format(
                nb.actor_id))
            continue
        for c in np.flatnonzero(nb.likelihoods > threshold):
            traj = to_world(nb.trajectories[c], nb.pose)
            poses = trajectory_poses(traj, nb.pose[2], nb.pose[:2])
            n = min(len(poses), len(ego_poses))
            boxes = footprints(poses[:n], nb.extent, inflation)
            hit = np.flatnonzero(rectangles_overlap(ego_boxes[:n], boxes))
            if len(hit):
                culprits.append((nb.actor_id, int(c), int(hit[0])))
    return GateDecision(len(culprits) > 0, culprits)
