"""
fleetplan learns motion planning from every vehicle it observes: map-view
perception, command-conditioned planning, privileged distillation and a
collision-aware controller, trained and evaluated closed loop in a
deterministic 2D micro-world.
"""

__author__ = "Fleetplan Development Team"
__version__ = "0.1"

from .pipeline import Pipeline
