# coding: utf-8

"""
Sensor emulation: a planar multi-ring lidar and a per-point semantic
oracle standing in for camera segmentation.
"""

import logging

import numpy as np

from fleetplan.geometry import (points_in_rectangle, ray_cast,
                                rectangle_segments, to_world)
from fleetplan.world.state import EGO_ID, PEDESTRIAN

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)

BACKGROUND, VEHICLES, ROADS, LANE_MARKINGS, PEDESTRIANS = range(5)
SEMANTIC_CLASSES = ("background", "vehicles", "roads", "lane markings",
                    "pedestrians")


def _scene_segments(state):
    segs = [state.roadmap.obstacle_segments()]
    for a in state.actors:
        if a.actor_id == EGO_ID:
            continue
        segs.append(rectangle_segments(a.corners()).reshape(-1, 2, 2))
    return np.concatenate(segs) if segs else np.zeros((0, 2, 2))


def lidar_scan(state, rays=360, rings=(0.2, 0.6, 1.0, 1.4), max_range=60.0,
               ground_ranges=(4.0, 6.0, 8.0, 11.0, 14.0, 18.0, 24.0, 30.0),
               ground_step=2.0, dropout=0.0, intensity=1.0, rng=None):
    """
    Casts rays from the ego centre against actor rectangles and obstacle
    outlines.

    Args:
        state (WorldState): the world; the ego is actor 0.
        rays (int): azimuth rays over 360 degrees.
        rings ([float]): heights of the planar rings; every obstacle hit
            yields one point per ring.
        max_range (float): range in m.
        ground_ranges ([float]): ranges of ground returns, cast every
            ground_step degrees and occluded by nearer obstacle hits. Only
            worlds with a drivable area have ground.
        dropout (float): fraction of points removed at random.
        intensity (float): constant return intensity.
        rng (np.random.Generator): randomness for dropout.

    Returns:
        (N, 4) float32 array of (x, y, z, intensity) in the ego frame.
    """
    ego = state.ego
    segs = _scene_segments(state)
    az = 2.0 * np.pi * np.arange(rays) / rays
    world_az = ego.yaw + az
    dirs = np.stack([np.cos(world_az), np.sin(world_az)], axis=1)
    dist, _ = ray_cast(ego.xy, dirs, segs, max_range)
    hit = np.isfinite(dist)
    d, a = dist[hit], az[hit]
    n_rings = len(rings)
    xy = np.repeat(np.stack([d * np.cos(a), d * np.sin(a)], axis=1),
                   n_rings, axis=0)
    z = np.tile(np.asarray(rings, dtype=float), len(d))
    pts = [np.column_stack([xy, z, np.full(len(z), intensity)])]

    if not state.roadmap.is_empty and len(ground_ranges):
        gaz = np.deg2rad(np.arange(0.0, 360.0, ground_step))
        gdirs = np.stack([np.cos(ego.yaw + gaz), np.sin(ego.yaw + gaz)],
                         axis=1)
        gdist, _ = ray_cast(ego.xy, gdirs, segs, max_range)
        r = np.asarray(ground_ranges, dtype=float)
        rr, aa = np.meshgrid(r, gaz)
        keep = (rr < gdist[:, None]) & (rr <= max_range)
        rr, aa = rr[keep], aa[keep]
        pts.append(np.column_stack([rr * np.cos(aa), rr * np.sin(aa),
                                    np.zeros(len(rr)),
                                    np.full(len(rr), intensity)]))
    cloud = np.concatenate(pts).astype(np.float32)
    if dropout > 0 and len(cloud):
        rng = rng if rng is not None else state.tick_rng(1)
        cloud = cloud[rng.random(len(cloud)) >= dropout]
    return cloud


def semantic_oracle(points, state, noise_rate=0.0, rng=None):
    """
    Per-point class scores over SEMANTIC_CLASSES.

    Every point gets the class of what it hit, found geometrically: ground
    returns are road, lane marking or background by the map rasters, raised
    returns are the actor they lie on or background. With probability
    noise_rate the class is replaced by one of the four others, then the
    one-hot vector is softened by noise_rate / 2.

    Returns:
        (N, 5) float32 scores, each row summing to 1.
    """
    if not 0.0 <= noise_rate < 1.0:
        raise ValueError("noise_rate must lie in [0, 1)")
    points = np.asarray(points, dtype=float).reshape(-1, 4)
    n = len(points)
    labels = np.full(n, BACKGROUND, dtype=int)
    if n:
        ego = state.ego
        xy = to_world(points[:, :2], ego.pose)
        ground = points[:, 2] <= 1e-6
        if ground.any() and not state.roadmap.is_empty:
            road, solid, broken = state.roadmap.lookup(xy[ground])
            g = np.where(road > 0, ROADS, BACKGROUND)
            g = np.where((solid > 0) | (broken > 0), LANE_MARKINGS, g)
            labels[ground] = g
        raised = ~ground
        for a in state.actors:
            if a.actor_id == EGO_ID:
                continue
            on = raised & points_in_rectangle(xy, a.x, a.y, a.yaw,
                                              a.hl + 0.05, a.hw + 0.05)
            labels[on] = PEDESTRIANS if a.kind == PEDESTRIAN else VEHICLES
    if noise_rate > 0 and n:
        rng = rng if rng is not None else state.tick_rng(2)
        flip = rng.random(n) < noise_rate
        shift = rng.integers(1, 5, size=n)
        labels = np.where(flip, (labels + shift) % 5, labels)
    eps = noise_rate / 2.0
    scores = np.full((n, 5), eps / 5.0)
    scores[np.arange(n), labels] += 1.0 - eps
    return scores.astype(np.float32)
