# coding: utf-8

"""
Decoding of oriented boxes from the centerness, orientation and box maps,
with a max-pool standing in for non-maximum suppression.
"""

import logging

import numpy as np
import torch.nn.functional as F
from monty.json import MSONable

from fleetplan.geometry import box_corners, points_in_rectangle

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)

DETECTION_CLASSES = ("vehicle", "pedestrian")


class OrientedBox(MSONable):
    """
    A detection in the grid frame.

    Args:
        x, y (float): centre in m.
        yaw (float): heading in rad.
        hl, hw (float): half extents in m.
        cls (str): "vehicle" or "pedestrian".
        score (float): centerness peak value.
        is_ego (bool): whether this is the ego vehicle.
    """

    def __init__(self, x, y, yaw, hl, hw, cls="vehicle", score=1.0,
                 is_ego=False):
        if hl <= 0 or hw <= 0:
            raise ValueError("Box extents must be positive")
        if cls not in DETECTION_CLASSES:
            raise ValueError("Unknown detection class {}".format(cls))
        self.x = float(x)
        self.y = float(y)
        self.yaw = float(yaw)
        self.hl = float(hl)
        self.hw = float(hw)
        self.cls = cls
        self.score = float(score)
        self.is_ego = bool(is_ego)

    @property
    def pose(self):
        return np.array([self.x, self.y, self.yaw])

    def corners(self, inflate=0.0):
        return box_corners(self.x, self.y, self.yaw, self.hl + inflate,
                           self.hw + inflate)

    def contains(self, xy):
        return bool(points_in_rectangle(np.asarray(xy, float)[None], self.x,
                                        self.y, self.yaw, self.hl,
                                        self.hw)[0])

    def as_row(self):
        return np.array([self.x, self.y, self.yaw, self.hl, self.hw,
                         DETECTION_CLASSES.index(self.cls), self.score,
                         float(self.is_ego)])

    @classmethod
    def from_row(cls, row):
        return cls(row[0], row[1], row[2], row[3], row[4],
                   DETECTION_CLASSES[int(row[5])], row[6], bool(row[7]))

    def __repr__(self):
        return "OrientedBox({}, x={:.2f}, y={:.2f}, yaw={:.2f}, " \
            "score={:.2f}{})".format(self.cls, self.x, self.y, self.yaw,
                                     self.score,
                                     ", ego" if self.is_ego else "")


def pool_nms(heat, kernel=3):
    """
    Zeroes every cell that is not the maximum of its kernel x kernel
    neighbourhood.
    """
    pad = (kernel - 1) // 2
    hmax = F.max_pool2d(heat, (kernel, kernel), stride=1, padding=pad)
    keep = (hmax == heat).to(heat.dtype)
    return heat * keep


def decode_detections(maps, threshold=0.3, pool_k=3, index=0, spec=None):
    """
    Oriented boxes at the centerness peaks of one sample of a HeadMaps
    batch.

    Args:
        maps (HeadMaps): head outputs.
        threshold (float): minimum peak value, in (0, 1).
        pool_k (int): suppression window, odd.
        index (int): batch index.
        spec (GridSpec): grid of the maps; defaults to maps.spec.

    Returns:
        [OrientedBox] sorted by decreasing score. The vehicle box holding
        the ego anchor cell is flagged is_ego.
    """
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    if pool_k < 1 or pool_k % 2 == 0:
        raise ValueError("pool_k must be a positive odd number")
    spec = spec if spec is not None else maps.spec
    if spec is None:
        raise ValueError("decode_detections needs the grid of the maps")
    if tuple(maps.shape) != spec.shape:
        raise ValueError("Maps of shape {} do not match {}".format(
            maps.shape, spec))
    heat = maps.centerness[index:index + 1].detach()
    peaks = pool_nms(heat, pool_k)[0].cpu().numpy()
    orient = maps.orientation[index].detach().cpu().numpy()
    box = maps.box[index].detach().cpu().numpy()
    boxes = []
    for c, name in enumerate(DETECTION_CLASSES):
        rows, cols = np.nonzero(peaks[c] > threshold)
        for r, k in zip(rows, cols):
            s, co = orient[:, r, k]
            xy = spec.cell_center(r, k)
            hl, hw = np.exp(np.clip(box[:, r, k], -10.0, 10.0))
            boxes.append(OrientedBox(xy[0], xy[1], np.arctan2(s, co), hl, hw,
                                     name, peaks[c, r, k]))
    boxes.sort(key=lambda b: (-b.score, b.cls, b.y, b.x))
    anchor = spec.cell_center(*spec.ego_cell)
    for b in boxes:
        if b.cls == "vehicle" and b.contains(anchor):
            b.is_ego = True
            break
    return boxes
