# coding: utf-8

import logging
import os

from fleetplan.checkpoint import load_checkpoint
from fleetplan.config import RunConfig
from fleetplan.perception.pillars import GridSpec
from fleetplan.pipeline import Validator

"""
Validators for training checkpoints.
"""

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)


class CheckpointValidator(Validator):
    """
    Checks that a checkpoint exists, loads, was trained on the grid of the
    current config and, when kind is given, is of that kind.
    """

    def __init__(self, checkpoint="checkpoints/student.pt",
                 config_file="config.yaml", kind=None):
        self.checkpoint = checkpoint
        self.config_file = config_file
        self.kind = kind

    def check(self):
        cfg = RunConfig.from_file(self.config_file) \
            if os.path.exists(self.config_file) else RunConfig()
        try:
            ckpt = load_checkpoint(self.checkpoint, GridSpec.from_config(cfg))
        except (FileNotFoundError, ValueError) as ex:
            logger.error("Bad checkpoint: {}".format(ex))
            return True
        except Exception as ex:
            logger.error("Unreadable checkpoint {}: {}".format(
                self.checkpoint, ex))
            return True
        if self.kind is not None and ckpt.get("kind") != self.kind:
            logger.error("Checkpoint {} is {}, expected {}".format(
                self.checkpoint, ckpt.get("kind"), self.kind))
            return True
        return False

    def __str__(self):
        return "CheckpointValidator"
