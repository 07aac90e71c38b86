# coding: utf-8

import logging
import os

from fleetplan.pipeline import Validator
from fleetplan.utils import load_npz
from fleetplan.world.recorder import FRAME_FIELDS, find_logs

"""
Validators for collected driving logs.
"""

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)


class DrivingLogValidator(Validator):
    """
    Checks that the log root holds at least min_frames frames and that every
    record carries the contract fields.
    """

    def __init__(self, logs_dir="logs", min_frames=1):
        self.logs_dir = logs_dir
        self.min_frames = min_frames

    def check(self):
        if not os.path.isdir(self.logs_dir):
            logger.error("No log root {}".format(self.logs_dir))
            return True
        total = 0
        for log in find_logs(self.logs_dir):
            for f in log.frame_files():
                try:
                    rec = load_npz(f)
                except Exception:
                    logger.error("Unreadable frame {}".format(f))
                    return True
                missing = [k for k in FRAME_FIELDS if k not in rec]
                if missing:
                    logger.error("Frame {} lacks {}".format(f, missing))
                    return True
                total += 1
        if total < self.min_frames:
            logger.error("Only {} frames, expected {}".format(
                total, self.min_frames))
            return True
        return False

    def __str__(self):
        return "DrivingLogValidator"
