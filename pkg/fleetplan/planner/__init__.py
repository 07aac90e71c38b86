"""
This package implements the motion planner: rotated ROI warping, the
shared ROI embedder, the per-command coarse planner with its command
classifier, the iterative refiner and the motion losses.
"""

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__status__ = "Production"
__date__ = "10/17/26"

from .roi import RoiTemplate, roi_warp
from .network import (CoarsePlanner, MotionModel, PlanSet, RefinedPlan,
                      Refiner, RoiEmbedder)
from .losses import loss_cmd, loss_ego, loss_other, loss_refine, motion_loss
