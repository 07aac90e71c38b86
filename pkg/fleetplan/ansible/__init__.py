"""
The ansible package provides a mongo-like syntax for making modifications to
dicts and files. Run configs are overridden from the command line with it,
and error handlers express their corrections as modification dicts so the
pipeline log records exactly what changed between two attempts of a stage.
"""

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__status__ = "Production"
__date__ = "10/17/26"


from .interpreter import Modder
from .actions import FileActions, DictActions
