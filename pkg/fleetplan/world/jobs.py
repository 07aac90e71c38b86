# coding: utf-8

"""
Pipeline stages of the micro-world: expert data collection.
"""

import logging
import math

from fleetplan.pipeline import ConfigStage
from fleetplan.world.recorder import collect

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)


class CollectJob(ConfigStage):
    """
    Records expert DrivingLogs under <workdir>/logs. Collection is
    incremental: complete episodes already on disk are kept, so rerunning
    after a FrameShortfallHandler correction only drives the new episodes.
    """

    def __init__(self, config_file="config.yaml", workdir=".",
                 overrides=None, frames=None, logs_dir="logs"):
        """
        Args:
            frames (int): frames to collect; defaults to world.frames.
            logs_dir (str): log root, relative to workdir.
        """
        super(CollectJob, self).__init__(config_file, workdir, overrides)
        self.frames = frames
        self.logs_dir = logs_dir
        self.summary = None

    @staticmethod
    def episodes_for(cfg, frames):
        """
        Episodes needed for frames frames if no episode ends early.
        """
        w = cfg.world
        per_episode = int(math.ceil(w.episode_ticks / w.ticks_per_frame))
        return max(int(math.ceil(frames / float(per_episode))), 1)

    def run(self):
        frames = self.frames if self.frames is not None else \
            self.cfg.world.frames
        self.summary = collect(self.cfg, self.path(self.logs_dir), frames)
        return self.summary

    def as_dict(self):
        d = super(CollectJob, self).as_dict()
        d.pop("summary", None)
        return d
