"""
This package implements the closed-loop evaluation harness: expert, zero
and learned policies, episodes with infraction monitoring, route scoring,
the evaluation matrix and its pipeline Stage and validator.
"""

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__status__ = "Production"
__date__ = "10/17/26"
