# coding: utf-8

"""
Rotated region-of-interest warping: a fixed template in a vehicle's frame
is placed at the vehicle pose and the map-view grid is sampled bilinearly
on it, so every vehicle sees its surroundings from its own viewpoint.
"""

import logging

import numpy as np
import torch
import torch.nn.functional as F
from monty.json import MSONable

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)


class RoiTemplate(MSONable):
    """
    Args:
        size ((int, int)): cells along the vehicle's forward and lateral
            axes.
        forward ((float, float)): forward extent in m.
        lateral ((float, float)): lateral extent in m, left positive.
    """

    def __init__(self, size=(24, 12), forward=(-2.0, 10.0),
                 lateral=(-3.0, 3.0)):
        self.size = tuple(int(s) for s in size)
        self.forward = tuple(float(v) for v in forward)
        self.lateral = tuple(float(v) for v in lateral)
        if min(self.size) < 1 or self.forward[1] <= self.forward[0] or \
                self.lateral[1] <= self.lateral[0]:
            raise ValueError("Degenerate ROI template")

    @classmethod
    def from_config(cls, cfg):
        p = cfg.planner
        return cls(p.roi_size, p.roi_forward, p.roi_lateral)

    def local_points(self, dtype=torch.float32, device=None):
        """
        Cell centres (L, W, 2) of the template in the vehicle frame.
        """
        nl, nw = self.size
        du = (self.forward[1] - self.forward[0]) / nl
        dv = (self.lateral[1] - self.lateral[0]) / nw
        u = self.forward[0] + (torch.arange(nl, dtype=dtype,
                                            device=device) + 0.5) * du
        v = self.lateral[0] + (torch.arange(nw, dtype=dtype,
                                            device=device) + 0.5) * dv
        uu, vv = torch.meshgrid(u, v, indexing="ij")
        return torch.stack([uu, vv], dim=-1)


def poses_inside(poses, spec):
    poses = np.asarray(poses, dtype=float).reshape(-1, 3)
    return (poses[:, 0] >= spec.x_range[0]) & \
        (poses[:, 0] < spec.x_range[1]) & \
        (poses[:, 1] >= spec.y_range[0]) & (poses[:, 1] < spec.y_range[1])


def roi_warp(f, poses, spec, template=None, batch_index=None):
    """
    Crops rotated ROIs out of a feature grid.

    Args:
        f ((B, C, H', W') tensor): grid covering spec's metric extent at any
            resolution.
        poses ((N, 3)): vehicle poses (x, y, yaw) in the grid frame.
        spec (GridSpec): metric extent of f.
        template (RoiTemplate): crop template.
        batch_index ((N,) ints): sample of f each pose belongs to; defaults
            to 0.

    Returns:
        (N, C, L, W) tensor, L along the vehicle's forward axis and W along
        its left axis. Gradients flow to f.
    """
    template = template or RoiTemplate()
    poses_np = np.asarray(poses.detach().cpu() if torch.is_tensor(poses)
                          else poses, dtype=float).reshape(-1, 3)
    if not poses_inside(poses_np, spec).all():
        raise ValueError("ROI pose outside the grid: {}".format(
            poses_np[~poses_inside(poses_np, spec)].tolist()))
    n = len(poses_np)
    if batch_index is None:
        batch_index = torch.zeros(n, dtype=torch.long, device=f.device)
    else:
        batch_index = torch.as_tensor(batch_index, dtype=torch.long,
                                      device=f.device)
    pose = torch.as_tensor(poses_np, dtype=f.dtype, device=f.device)
    local = template.local_points(f.dtype, f.device)
    c = torch.cos(pose[:, 2])[:, None, None]
    s = torch.sin(pose[:, 2])[:, None, None]
    u, v = local[None, ..., 0], local[None, ..., 1]
    x = pose[:, 0, None, None] + c * u - s * v
    y = pose[:, 1, None, None] + s * u + c * v
    gx = 2.0 * (x - spec.x_range[0]) / (spec.x_range[1] - spec.x_range[0]) \
        - 1.0
    gy = 2.0 * (y - spec.y_range[0]) / (spec.y_range[1] - spec.y_range[0]) \
        - 1.0
    grid = torch.stack([gx, gy], dim=-1)
    if n == 0:
        nl, nw = template.size
        return f.new_zeros((0, f.shape[1], nl, nw))
    return F.grid_sample(f[batch_index], grid, mode="bilinear",
                         padding_mode="zeros", align_corners=False)
