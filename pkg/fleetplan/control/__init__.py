"""
This package implements the vehicle controller: lateral and longitudinal
PIDs following a refined plan, the brake classifier and its override, and
multi-modal collision gating.
"""

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__status__ = "Production"
__date__ = "10/17/26"

from .pid import PID, lateral_control, longitudinal_control
from .gate import GateDecision, NeighbourPlans, collision_gate
from .brake import BrakeClassifier
from .controller import VehicleController, brake_override
