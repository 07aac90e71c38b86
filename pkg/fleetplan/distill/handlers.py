# coding: utf-8

"""
Error handlers for the training stages. Both read the metrics log a stage
writes and, on a bad run, back up its artifacts and lower the stage
learning rate in the config file. The diverged checkpoint is deleted so
the rerun starts afresh.
"""

import logging
import math
import os

from fleetplan.config import ConfigModder, RunConfig
from fleetplan.distill.metrics import read_metrics
from fleetplan.pipeline import ErrorHandler
from fleetplan.utils import backup

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)

STAGE_LR = {"perception": "perception.lr",
            "privileged": "train.privileged_lr",
            "distill": "train.distill_lr",
            "brake": "train.brake_lr"}


class LearningRateHandler(ErrorHandler):
    """
    Shared correction: back up metrics and checkpoint, then multiply the
    learning rate of the stage that wrote the metrics by lr_factor. Gives
    up once the rate would fall below min_lr.
    """

    error_name = None

    def __init__(self, config_file="config.yaml", metrics_file=None,
                 checkpoint=None, lr_key=None, lr_factor=0.5, min_lr=1e-6):
        """
        Args:
            config_file (str): the RunConfig file the stage reads.
            metrics_file (str): metrics log of the stage.
            checkpoint (str): checkpoint of the stage, backed up with the
                metrics.
            lr_key (str): dotted learning-rate key; taken from the stage
                name in the metrics when None.
            lr_factor (float): multiplier applied per correction.
            min_lr (float): smallest learning rate worth retrying.
        """
        self.config_file = config_file
        self.metrics_file = metrics_file
        self.checkpoint = checkpoint
        self.lr_key = lr_key
        self.lr_factor = lr_factor
        self.min_lr = min_lr
        self.records = []

    def _config(self):
        if os.path.exists(self.config_file):
            return RunConfig.from_file(self.config_file)
        return RunConfig()

    def _read(self):
        self.records = read_metrics(self.metrics_file) \
            if self.metrics_file else []
        return self.records

    def _key(self):
        if self.lr_key:
            return self.lr_key
        stage = self.records[-1]["stage"] if self.records else None
        if stage not in STAGE_LR:
            raise ValueError("Cannot tell the learning rate of stage "
                             "{}".format(stage))
        return STAGE_LR[stage]

    def correct(self):
        backup([f for f in (self.metrics_file, self.checkpoint) if f])
        cfg = self._config()
        key = self._key()
        lr = cfg.get(key) * self.lr_factor
        errors = [self.describe()]
        if lr < self.min_lr:
            logger.error("{} would drop below {}".format(key, self.min_lr))
            return {"errors": errors, "actions": None}
        actions = [{"dict": self.config_file,
                    "action": {"_mul": {key: self.lr_factor}}}]
        if self.checkpoint and os.path.exists(self.checkpoint):
            actions.append({"file": self.checkpoint,
                            "action": {"_file_delete": {"mode": "actual"}}})
        ConfigModder().apply_actions(actions)
        logger.info("{}: {} lowered to {:.3g}".format(self, key, lr))
        return {"errors": errors, "actions": actions}

    def describe(self):
        return self.error_name

    def __str__(self):
        return self.__class__.__name__


class NonFiniteLossHandler(LearningRateHandler):
    """
    Detects a NaN or infinite loss term anywhere in the metrics log.
    """

    error_name = "Non-finite loss"

    def check(self):
        self.bad_step = None
        for rec in self._read():
            for k, v in rec.items():
                if isinstance(v, float) and not math.isfinite(v):
                    self.bad_step = rec["step"]
                    return True
        return False

    def describe(self):
        return "Non-finite loss at step {}".format(self.bad_step)


class LossDivergenceHandler(LearningRateHandler):
    """
    Detects a run whose last logged loss exceeds divergence_factor times
    the first one.
    """

    error_name = "Loss divergence"

    def __init__(self, config_file="config.yaml", metrics_file=None,
                 checkpoint=None, lr_key=None, lr_factor=0.5, min_lr=1e-6,
                 divergence_factor=None):
        """
        Args:
            divergence_factor (float): defaults to train.divergence_factor.
        """
        super(LossDivergenceHandler, self).__init__(
            config_file, metrics_file, checkpoint, lr_key, lr_factor, min_lr)
        self.divergence_factor = divergence_factor

    def check(self):
        records = [r for r in self._read() if math.isfinite(r["loss"])]
        if len(records) < 2:
            return False
        factor = self.divergence_factor
        if factor is None:
            factor = self._config().train.divergence_factor
        self.first, self.last = records[0]["loss"], records[-1]["loss"]
        return self.last > factor * abs(self.first)

    def describe(self):
        return "Loss diverged from {:.4g} to {:.4g}".format(self.first,
                                                             self.last)
