"""
This package implements the deterministic 2D micro-world: maps, routes,
actors and their dynamics, the scripted expert, sensor emulation, the pose
EKF and DrivingLog recording, plus the collection Stage and its handlers.
"""

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__status__ = "Production"
__date__ = "10/17/26"

from .state import WorldError, OffRoadError
