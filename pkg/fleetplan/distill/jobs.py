# coding: utf-8

"""
Pipeline stages of the training stack: perception pre-training, the
privileged planner, the brake classifier and student distillation.
"""

import logging

from fleetplan.distill.student import distill_student
from fleetplan.distill.training import (train_brake, train_perception,
                                        train_privileged)
from fleetplan.pipeline import ConfigStage
from fleetplan.world.recorder import find_logs

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)


class TrainingJob(ConfigStage):
    """
    Base class of the training stages. Reads the DrivingLogs under
    <workdir>/<logs_dir> and writes a checkpoint and a metrics file, both
    relative to workdir.
    """

    default_checkpoint = None
    stage = None

    def __init__(self, config_file="config.yaml", workdir=".",
                 overrides=None, logs_dir="logs", checkpoint=None,
                 metrics=None, steps=None):
        """
        Args:
            logs_dir (str): log root.
            checkpoint (str): output checkpoint; defaults per stage.
            metrics (str): metrics file; defaults to
                metrics/<stage>.jsonl.
            steps (int): optimizer steps; defaults to the config value.
        """
        super(TrainingJob, self).__init__(config_file, workdir, overrides)
        self.logs_dir = logs_dir
        self.checkpoint = checkpoint or self.default_checkpoint
        self.metrics = metrics or "metrics/{}.jsonl".format(self.stage)
        self.steps = steps
        self.summary = None

    def logs(self):
        logs = find_logs(self.path(self.logs_dir))
        if not logs:
            raise FileNotFoundError("No driving logs under {}".format(
                self.path(self.logs_dir)))
        return logs

    def train(self, logs):
        raise NotImplementedError

    def run(self):
        logs = self.logs()
        logger.info("{} on {} logs ({} frames)".format(
            self.name, len(logs), sum(len(l) for l in logs)))
        self.summary = self.train(logs)
        logger.info("{} finished: {}".format(self.name, self.summary))
        return self.summary

    def as_dict(self):
        d = super(TrainingJob, self).as_dict()
        d.pop("summary", None)
        return d


class PerceptionJob(TrainingJob):
    default_checkpoint = "checkpoints/perception.pt"
    stage = "perception"

    def train(self, logs):
        return train_perception(logs, self.cfg, self.path(self.checkpoint),
                                self.path(self.metrics), self.steps)


class PrivilegedJob(TrainingJob):
    default_checkpoint = "checkpoints/privileged.pt"
    stage = "privileged"

    def train(self, logs):
        return train_privileged(logs, self.cfg, self.path(self.checkpoint),
                                self.path(self.metrics), self.steps)


class BrakeJob(TrainingJob):
    default_checkpoint = "checkpoints/brake.pt"
    stage = "brake"

    def train(self, logs):
        return train_brake(logs, self.cfg, self.path(self.checkpoint),
                           self.path(self.metrics), self.steps)


class DistillJob(TrainingJob):
    """
    Distils the student from a privileged checkpoint. The staged regime
    also needs a perception checkpoint.
    """

    default_checkpoint = "checkpoints/student.pt"
    stage = "distill"

    def __init__(self, config_file="config.yaml", workdir=".",
                 overrides=None, logs_dir="logs", checkpoint=None,
                 metrics=None, steps=None,
                 teacher="checkpoints/privileged.pt",
                 perception="checkpoints/perception.pt"):
        super(DistillJob, self).__init__(config_file, workdir, overrides,
                                         logs_dir, checkpoint, metrics, steps)
        self.teacher = teacher
        self.perception = perception

    def train(self, logs):
        perception = self.path(self.perception) \
            if self.cfg.train.regime == "staged" else None
        return distill_student(logs, self.cfg, self.path(self.teacher),
                               self.path(self.checkpoint), perception,
                               self.path(self.metrics), self.steps)
