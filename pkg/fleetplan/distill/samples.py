# coding: utf-8

"""
Privileged inputs and per-vehicle motion samples of recorded frames.

The privileged planner reads a ground-truth raster stack instead of
sensor features. Motion samples gather every vehicle of a batch whose
future is fully observed: its ROI pose in the grid frame, its future in its
own frame and, for the ego, the high-level command and the next goal.
"""

import logging

import numpy as np
import torch

from fleetplan.geometry import points_in_rectangle, to_local
from fleetplan.perception.frames import local_actors
from fleetplan.planner.roi import poses_inside

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)

GT_CHANNELS = ("road", "solid", "broken", "vehicle", "vehicle_sin",
               "vehicle_cos", "pedestrian")
VEHICLE, PEDESTRIAN = 0, 1


def rasterize_gt(frame, spec):
    """
    Ground-truth input grid (7, H, W) at pillar resolution: the three map
    rasters, vehicle occupancy with the heading of the covering vehicle as
    (sin, cos), and pedestrian occupancy. A cell belongs to a footprint
    when its centre lies inside it.
    """
    h, w = spec.shape
    sem = np.asarray(frame["sem_rasters"])
    if sem.shape != (3, h, w):
        raise ValueError("Map rasters {} do not match grid {}".format(
            sem.shape, spec.shape))
    out = np.zeros((len(GT_CHANNELS), h, w), dtype=np.float32)
    out[:3] = sem
    rows, cols = np.mgrid[0:h, 0:w]
    centers = spec.cell_center(rows.ravel(), cols.ravel())
    half = spec.pillar_size / 2.0
    for _, cls, x, y, yaw, _, hl, hw in local_actors(frame):
        # skip actors whose footprint cannot touch the grid
        reach = np.hypot(hl, hw) + half
        if x + reach < spec.x_range[0] or x - reach > spec.x_range[1] or \
                y + reach < spec.y_range[0] or y - reach > spec.y_range[1]:
            continue
        inside = points_in_rectangle(centers, x, y, yaw, hl, hw).reshape(h, w)
        if int(cls) == VEHICLE:
            out[3][inside] = 1.0
            out[4][inside] = np.sin(yaw)
            out[5][inside] = np.cos(yaw)
        else:
            out[6][inside] = 1.0
    return out


def gt_grids(frames, spec, dtype=torch.float32, device=None):
    return torch.as_tensor(np.stack([rasterize_gt(f, spec) for f in frames]),
                           dtype=dtype, device=device)


class MotionSamples(object):
    """
    Vehicles of a batch of frames.

    Attributes:
        poses ((V, 3)): ROI poses in the grid frame of their frame.
        batch_index ((V,)): frame of each vehicle.
        actor_ids ((V,)): recorded actor ids.
        labels ((V, n, 2)): futures in each vehicle's own frame; NaN rows
            where unobserved.
        is_ego ((V,) bool).
        commands ((V,)): ground-truth command for the ego, -1 otherwise.
        goals ((V, 2)): next goal in the ego's frame, NaN for others.
    """

    FIELDS = ("poses", "batch_index", "actor_ids", "labels", "is_ego",
              "commands", "goals")

    def __init__(self, poses, batch_index, actor_ids, labels, is_ego,
                 commands, goals):
        self.poses = poses
        self.batch_index = batch_index
        self.actor_ids = actor_ids
        self.labels = labels
        self.is_ego = is_ego
        self.commands = commands
        self.goals = goals

    def __len__(self):
        return len(self.poses)

    @property
    def n_other(self):
        return int((~self.is_ego).sum())

    def subset(self, mask):
        return MotionSamples(*[getattr(self, k)[mask] for k in self.FIELDS])

    def tensor(self, name, dtype=torch.float32, device=None):
        return torch.as_tensor(getattr(self, name), dtype=dtype,
                               device=device)


def frame_samples(frame, spec, vehicle_range=15.0, n=10,
                  require_labels=True):
    """
    Vehicles of one frame: the ego plus every other vehicle whose centre
    lies within vehicle_range m of the ego. Vehicles with a truncated
    future are dropped when require_labels is set, and vehicles whose pose
    falls outside the grid always are.
    """
    rows = local_actors(frame)
    world = np.asarray(frame["actors"], dtype=float).reshape(-1, 8)
    futures = np.asarray(frame["futures"], dtype=float)
    ego_xy = rows[0, 2:4]
    keep = rows[:, 1] == VEHICLE
    dist = np.linalg.norm(rows[:, 2:4] - ego_xy, axis=1)
    keep &= dist <= vehicle_range
    keep[0] = True
    keep &= poses_inside(rows[:, 2:5], spec)
    labels = np.full((len(rows), n, 2), np.nan)
    for a in np.flatnonzero(keep):
        fut = futures[a, :n]
        labels[a, :len(fut)] = to_local(fut, world[a, 2:5])
    if require_labels:
        keep &= np.isfinite(labels).reshape(len(rows), -1).all(axis=1)
    idx = np.flatnonzero(keep)
    is_ego = idx == 0
    commands = np.where(is_ego, int(frame["ego_cmd"]), -1)
    goals = np.full((len(idx), 2), np.nan)
    if is_ego.any():
        # the stored goal lies in the grid frame; express it in the ego's
        goals[is_ego] = to_local(np.asarray(frame["ego_goal"], dtype=float),
                                 (0.0, 0.0, rows[0, 4]))
    return (rows[idx, 2:5], rows[idx, 0].astype(int), labels[idx], is_ego,
            commands.astype(int), goals)


def gather_samples(frames, spec, vehicle_range=15.0, n=10,
                   require_labels=True):
    """
    MotionSamples of a batch of frames.
    """
    parts = [frame_samples(f, spec, vehicle_range, n, require_labels)
             for f in frames]
    poses = np.concatenate([p[0] for p in parts]).reshape(-1, 3)
    batch_index = np.concatenate([np.full(len(p[0]), b, dtype=int)
                                  for b, p in enumerate(parts)])
    ids = np.concatenate([p[1] for p in parts]).astype(int)
    labels = np.concatenate([p[2] for p in parts]).reshape(-1, n, 2)
    is_ego = np.concatenate([p[3] for p in parts]).astype(bool)
    commands = np.concatenate([p[4] for p in parts]).astype(int)
    goals = np.concatenate([p[5] for p in parts]).reshape(-1, 2)
    return MotionSamples(poses, batch_index, ids, labels, is_ego, commands,
                         goals)
