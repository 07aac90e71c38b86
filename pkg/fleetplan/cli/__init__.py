"""
Command line tools: the fleet entry point and the log replay renderer.
"""

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"
