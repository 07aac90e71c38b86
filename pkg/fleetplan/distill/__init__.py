"""
This package implements the training stack: ground-truth rasters and
motion samples from driving logs, perception pre-training, the privileged
planner, the brake classifier and student distillation, plus their
pipeline Stages, error handlers and validators.
"""

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__status__ = "Production"
__date__ = "10/17/26"
