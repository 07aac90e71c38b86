"""
This package implements the sparse pillar perception stack: point painting,
pillarization, the map-view backbone, detection and semantic heads, box
decoding, training targets and the perception loss.
"""

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__status__ = "Production"
__date__ = "10/17/26"

from .pillars import GridSpec, SparsePillars, point_paint, pillarize
from .network import HeadMaps, PerceptionModel
from .detection import OrientedBox, decode_detections
