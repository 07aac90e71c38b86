# coding: utf-8

"""
Map-view grids and the sparse pillar encoding of painted lidar points.

Grids follow the ego frame: columns run along +x (forward) and rows along
+y (left), so a point (x, y) falls in row floor((y - ymin) / pillar_size)
and column floor((x - xmin) / pillar_size).
"""

import logging

import numpy as np
from monty.json import MSONable

from fleetplan.geometry import rotation

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)

N_CLASSES = 5
POINT_DIMS = 4 + N_CLASSES
PILLAR_DIMS = POINT_DIMS + 2


class GridSpec(MSONable):
    """
    Extent and resolution of the map-view feature grid.

    Args:
        x_range ((float, float)): forward extent in m.
        y_range ((float, float)): lateral extent in m.
        pillar_size (float): pillar edge in m.
        out_stride (int): backbone output stride.
        channels (int): backbone output channels C.
        max_points (int): points kept per pillar P.
    """

    def __init__(self, x_range=(-10.0, 70.0), y_range=(-40.0, 40.0),
                 pillar_size=0.5, out_stride=2, channels=64, max_points=16):
        self.x_range = tuple(float(v) for v in x_range)
        self.y_range = tuple(float(v) for v in y_range)
        self.pillar_size = float(pillar_size)
        self.out_stride = int(out_stride)
        self.channels = int(channels)
        self.max_points = int(max_points)
        if self.pillar_size <= 0:
            raise ValueError("pillar_size must be positive")
        for lo, hi in (self.x_range, self.y_range):
            span = (hi - lo) / self.pillar_size
            if hi <= lo or abs(span - round(span)) > 1e-9:
                raise ValueError("Grid range ({}, {}) is not divisible by "
                                 "pillar_size {}".format(lo, hi,
                                                         self.pillar_size))
        if self.width % self.out_stride or self.height % self.out_stride:
            raise ValueError("Grid shape {} is not divisible by out_stride "
                             "{}".format(self.shape, self.out_stride))
        if self.max_points < 1:
            raise ValueError("max_points must be at least 1")

    @classmethod
    def from_config(cls, cfg):
        g = cfg.grid
        return cls(g.x_range, g.y_range, g.pillar_size, g.out_stride,
                   g.channels, g.max_points)

    @property
    def width(self):
        return int(round((self.x_range[1] - self.x_range[0]) /
                         self.pillar_size))

    @property
    def height(self):
        return int(round((self.y_range[1] - self.y_range[0]) /
                         self.pillar_size))

    @property
    def shape(self):
        """
        (H, W) at pillar resolution.
        """
        return self.height, self.width

    @property
    def out_shape(self):
        return self.height // self.out_stride, self.width // self.out_stride

    def cell_index(self, xy):
        """
        (row, col, inside) of points (..., 2).
        """
        xy = np.asarray(xy, dtype=float)
        col = np.floor((xy[..., 0] - self.x_range[0]) /
                       self.pillar_size).astype(np.int64)
        row = np.floor((xy[..., 1] - self.y_range[0]) /
                       self.pillar_size).astype(np.int64)
        inside = (row >= 0) & (row < self.height) & (col >= 0) & \
            (col < self.width)
        return row, col, inside

    def cell_center(self, row, col):
        """
        Metric centre (..., 2) of pillar cells.
        """
        x = self.x_range[0] + (np.asarray(col) + 0.5) * self.pillar_size
        y = self.y_range[0] + (np.asarray(row) + 0.5) * self.pillar_size
        return np.stack([x, y], axis=-1)

    @property
    def ego_cell(self):
        """
        The anchor cell holding the ego origin.
        """
        row, col, inside = self.cell_index(np.zeros(2))
        if not inside:
            raise ValueError("The grid does not contain the ego origin")
        return int(row), int(col)

    def as_dict(self):
        return {"@module": self.__class__.__module__,
                "@class": self.__class__.__name__,
                "x_range": list(self.x_range), "y_range": list(self.y_range),
                "pillar_size": self.pillar_size,
                "out_stride": self.out_stride, "channels": self.channels,
                "max_points": self.max_points}

    def __eq__(self, other):
        return isinstance(other, GridSpec) and \
            self.as_dict() == other.as_dict()

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash((self.x_range, self.y_range, self.pillar_size,
                     self.out_stride, self.channels, self.max_points))

    def __repr__(self):
        return "GridSpec(x={}, y={}, pillar={}, C={})".format(
            self.x_range, self.y_range, self.pillar_size, self.channels)


class SparsePillars(object):
    """
    Occupied pillars of a batch of clouds and the points they hold.

    Args:
        coords ((M, 3) int64): unique (batch, row, col), sorted.
        features ((N, D) float32): per-point features, painted dims followed
            by the offsets to the pillar centre.
        inverse ((N,) int64): pillar index of each point.
        spec (GridSpec): grid the pillars were built on.
        batch_size (int): number of clouds.
    """

    def __init__(self, coords, features, inverse, spec, batch_size=1):
        self.coords = np.asarray(coords, dtype=np.int64).reshape(-1, 3)
        self.features = np.asarray(features, dtype=np.float32).reshape(
            len(inverse), -1) if len(inverse) else \
            np.zeros((0, PILLAR_DIMS), dtype=np.float32)
        self.inverse = np.asarray(inverse, dtype=np.int64)
        self.spec = spec
        self.batch_size = int(batch_size)

    def __len__(self):
        return len(self.coords)

    @property
    def n_points(self):
        return len(self.inverse)

    def point_counts(self):
        """
        Dense (B, H, W) number of points kept per pillar.
        """
        h, w = self.spec.shape
        out = np.zeros((self.batch_size, h, w), dtype=np.int64)
        c = self.coords[self.inverse]
        np.add.at(out, (c[:, 0], c[:, 1], c[:, 2]), 1)
        return out

    @classmethod
    def collate(cls, pillars):
        """
        Concatenates single-cloud pillar sets into one batch.
        """
        if not pillars:
            raise ValueError("Nothing to collate")
        spec = pillars[0].spec
        coords, feats, inv = [], [], []
        offset, b = 0, 0
        for p in pillars:
            if p.spec != spec:
                raise ValueError("Cannot collate pillars of different grids")
            c = p.coords.copy()
            c[:, 0] += b
            coords.append(c)
            feats.append(p.features)
            inv.append(p.inverse + offset)
            offset += len(p.coords)
            b += p.batch_size
        return cls(np.concatenate(coords), np.concatenate(feats),
                   np.concatenate(inv), spec, b)


def point_paint(points, scores):
    """
    Appends the per-point semantic scores to (x, y, z, intensity).

    Args:
        points ((N, 4) array): lidar points.
        scores ((N, 5) array): class scores in SEMANTIC_CLASSES order.

    Returns:
        (N, 9) float32 painted points, input order preserved.
    """
    points = np.asarray(points, dtype=np.float32).reshape(-1, 4)
    scores = np.asarray(scores, dtype=np.float32)
    if scores.ndim != 2 or scores.shape[1] != N_CLASSES:
        raise ValueError("Expected {} scores per point, got shape {}".format(
            N_CLASSES, scores.shape))
    if len(scores) != len(points):
        raise ValueError("{} points but {} score vectors".format(
            len(points), len(scores)))
    return np.concatenate([points, scores], axis=1)


def pillarize(painted, spec, batch=0):
    """
    Groups painted points into the pillars of spec.

    Points outside the grid are dropped. Each kept point is augmented with
    its (dx, dy) offset to the pillar centre. A pillar keeps the max_points
    points closest to its centre; ties keep input order.

    Returns:
        SparsePillars
    """
    painted = np.asarray(painted, dtype=np.float32).reshape(-1, POINT_DIMS)
    row, col, inside = spec.cell_index(painted[:, :2])
    idx = np.nonzero(inside)[0]
    if len(idx) == 0:
        return SparsePillars(np.zeros((0, 3)), np.zeros((0, PILLAR_DIMS)),
                             np.zeros(0), spec)
    row, col = row[idx], col[idx]
    offsets = painted[idx, :2] - spec.cell_center(row, col)
    dist = np.hypot(offsets[:, 0], offsets[:, 1])
    lin = row * spec.width + col
    order = np.lexsort((idx, dist, lin))
    lin_sorted = lin[order]
    starts = np.r_[0, np.nonzero(np.diff(lin_sorted))[0] + 1]
    rank = np.arange(len(order)) - np.repeat(
        starts, np.diff(np.r_[starts, len(order)]))
    keep = order[rank < spec.max_points]
    keep = keep[np.argsort(idx[keep], kind="stable")]
    n_dropped = len(idx) - len(keep)
    if n_dropped:
        logger.debug("Dropped {} points from full pillars".format(n_dropped))
    uniq, inverse = np.unique(lin[keep], return_inverse=True)
    coords = np.stack([np.full(len(uniq), batch), uniq // spec.width,
                       uniq % spec.width], axis=1)
    feats = np.concatenate([painted[idx[keep]], offsets[keep]], axis=1)
    return SparsePillars(coords, feats, inverse.reshape(-1), spec)


def rotate_points(points, theta):
    """
    Rotates the xy columns of (N, >=2) points about the origin.
    """
    points = np.array(points, dtype=np.float32, copy=True)
    if len(points):
        points[:, :2] = points[:, :2] @ rotation(theta).T.astype(np.float32)
    return points
