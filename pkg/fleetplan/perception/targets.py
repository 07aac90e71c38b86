# coding: utf-8

"""
Training targets of the perception heads and the perception loss:
Gaussian-splatted centerness, orientation and box regression at the box
centres and the three semantic rasters.
"""

import logging

import numpy as np
import torch
import torch.nn.functional as F

from fleetplan.perception.frames import local_actors

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)

TARGET_KEYS = ("heatmap", "orientation", "box", "mask", "semantic")


def gaussian2D(shape, sigma=1):
    m, n = [(ss - 1.) / 2. for ss in shape]
    y, x = np.ogrid[-m:m + 1, -n:n + 1]
    h = np.exp(-(x * x + y * y) / (2 * sigma * sigma))
    h[h < np.finfo(h.dtype).eps * h.max()] = 0
    return h


def draw_gaussian(heatmap, center, radius, k=1):
    """
    Splats a Gaussian of the given radius at center (col, row), keeping the
    elementwise max with what is already drawn.
    """
    diameter = 2 * radius + 1
    gaussian = gaussian2D((diameter, diameter), sigma=diameter / 6)
    x, y = int(center[0]), int(center[1])
    height, width = heatmap.shape[0:2]
    left, right = min(x, radius), min(width - x, radius + 1)
    top, bottom = min(y, radius), min(height - y, radius + 1)
    masked_heatmap = heatmap[y - top:y + bottom, x - left:x + right]
    masked_gaussian = gaussian[radius - top:radius + bottom,
                               radius - left:radius + right]
    if min(masked_gaussian.shape) > 0 and min(masked_heatmap.shape) > 0:
        np.maximum(masked_heatmap, masked_gaussian * k, out=masked_heatmap)
    return heatmap


def gaussian_radius(det_size, min_overlap=0.7):
    """
    Largest centre shift, in cells, keeping a box of det_size (height,
    width) above min_overlap IoU with its ground truth.
    """
    height, width = det_size

    a1 = 1
    b1 = (height + width)
    c1 = width * height * (1 - min_overlap) / (1 + min_overlap)
    sq1 = np.sqrt(b1 ** 2 - 4 * a1 * c1)
    r1 = (b1 + sq1) / 2

    a2 = 4
    b2 = 2 * (height + width)
    c2 = (1 - min_overlap) * width * height
    sq2 = np.sqrt(b2 ** 2 - 4 * a2 * c2)
    r2 = (b2 + sq2) / 2

    a3 = 4 * min_overlap
    b3 = -2 * min_overlap * (height + width)
    c3 = (min_overlap - 1) * width * height
    sq3 = np.sqrt(b3 ** 2 - 4 * a3 * c3)
    r3 = (b3 + sq3) / 2
    return min(r1, r2, r3)


def splat_boxes(boxes, spec, min_overlap=0.1, min_radius=2):
    """
    Target maps of boxes given as rows (class, x, y, yaw, hl, hw) in the
    grid frame, class 0 for vehicles and 1 for pedestrians. Boxes whose
    centre is off the grid are skipped.

    Returns:
        dict of heatmap (2, H, W), orientation (2, H, W) as (sin, cos),
        box (2, H, W) as log half extents and the centre mask (H, W).
    """
    h, w = spec.shape
    heat = np.zeros((2, h, w), dtype=np.float32)
    orient = np.zeros((2, h, w), dtype=np.float32)
    box = np.zeros((2, h, w), dtype=np.float32)
    mask = np.zeros((h, w), dtype=bool)
    for cls, x, y, yaw, hl, hw in np.asarray(boxes, float).reshape(-1, 6):
        r, c, inside = spec.cell_index(np.array([x, y]))
        if not inside:
            continue
        size = (2 * hl / spec.pillar_size, 2 * hw / spec.pillar_size)
        radius = max(int(gaussian_radius(size, min_overlap)), min_radius)
        draw_gaussian(heat[int(cls)], (c, r), radius)
        orient[:, r, c] = np.sin(yaw), np.cos(yaw)
        box[:, r, c] = np.log(hl), np.log(hw)
        mask[r, c] = True
    return {"heatmap": heat, "orientation": orient, "box": box, "mask": mask}


def frame_targets(frame, spec, min_overlap=0.1, min_radius=2,
                  include_ego=True):
    """
    Perception targets of a recorded frame. The ego is a vehicle target.
    """
    rows = local_actors(frame)
    if not include_ego:
        rows = rows[1:]
    targets = splat_boxes(rows[:, [1, 2, 3, 4, 6, 7]], spec, min_overlap,
                          min_radius)
    sem = np.asarray(frame["sem_rasters"], dtype=np.float32)
    if sem.shape != (3,) + spec.shape:
        raise ValueError("Semantic rasters of shape {} do not match {}".format(
            sem.shape, spec))
    targets["semantic"] = sem
    return targets


def collate_targets(targets, dtype=torch.float32, device=None):
    """
    Stacks per-frame target dicts into batched tensors.
    """
    out = {}
    for k in TARGET_KEYS:
        arr = np.stack([t[k] for t in targets])
        t = torch.as_tensor(arr, device=device)
        out[k] = t if k == "mask" else t.to(dtype)
    return out


def focal_loss(logits, target, alpha=2, beta=4):
    """
    Penalty-reduced focal loss on centerness logits, normalized by the
    number of positive cells (target value 1).
    """
    pos = (target >= 1.0).to(logits.dtype)
    neg = 1.0 - pos
    p = torch.sigmoid(logits)
    pos_loss = -(torch.pow(1 - p, alpha) * F.logsigmoid(logits) * pos).sum()
    neg_loss = -(torch.pow(1 - target, beta) * torch.pow(p, alpha) *
                 F.logsigmoid(-logits) * neg).sum()
    n_pos = pos.sum().clamp(min=1.0)
    return (pos_loss + neg_loss) / n_pos


def perception_loss(maps, targets):
    """
    Semantic BCE, centerness focal loss and L1 on orientation and box at the
    ground-truth centres.

    Args:
        maps (HeadMaps): predictions, (B, k, H, W).
        targets (dict): collate_targets output on the same grid.

    Returns:
        (total loss, {term name: loss})
    """
    if tuple(targets["heatmap"].shape[-2:]) != tuple(maps.shape) or \
            targets["heatmap"].shape[0] != maps.center.shape[0]:
        raise ValueError("Targets of shape {} do not match maps of shape "
                         "{}".format(tuple(targets["heatmap"].shape),
                                     tuple(maps.center.shape)))
    semantic = F.binary_cross_entropy_with_logits(maps.semantic,
                                                  targets["semantic"])
    center = focal_loss(maps.center, targets["heatmap"])
    mask = targets["mask"].unsqueeze(1).to(maps.orientation.dtype)
    n = mask.sum().clamp(min=1.0) * 2
    orientation = ((maps.orientation - targets["orientation"]).abs() *
                   mask).sum() / n
    box = ((maps.box - targets["box"]).abs() * mask).sum() / n
    terms = {"semantic": semantic, "center": center,
             "orientation": orientation, "box": box}
    return semantic + center + orientation + box, terms
