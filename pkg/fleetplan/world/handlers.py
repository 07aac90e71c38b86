# coding: utf-8

"""
Error handlers for data collection.
"""

import logging
import math
import os

from fleetplan.config import ConfigModder, RunConfig
from fleetplan.pipeline import ErrorHandler
from fleetplan.world.recorder import find_logs

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)


class FrameShortfallHandler(ErrorHandler):
    """
    Detects a collection that produced fewer frames than requested, which
    happens when episodes end early (route end or an off-road expert), and
    raises world.episodes so that the rerun drives additional episodes.
    """

    def __init__(self, config_file="config.yaml", logs_dir="logs",
                 frames=None, max_episodes=10000):
        """
        Args:
            config_file (str): the RunConfig file the CollectJob reads.
            logs_dir (str): log root.
            frames (int): requested frames; defaults to world.frames.
            max_episodes (int): never raise the episode count beyond this.
        """
        self.config_file = config_file
        self.logs_dir = logs_dir
        self.frames = frames
        self.max_episodes = max_episodes

    def _config(self):
        if os.path.exists(self.config_file):
            return RunConfig.from_file(self.config_file)
        return RunConfig()

    def _target(self, cfg):
        return self.frames if self.frames is not None else cfg.world.frames

    def check(self):
        cfg = self._config()
        logs = find_logs(self.logs_dir) if os.path.isdir(self.logs_dir) \
            else []
        self.collected = sum(len(l) for l in logs)
        return self.collected < self._target(cfg)

    def correct(self):
        cfg = self._config()
        target = self._target(cfg)
        episodes = cfg.world.episodes
        if episodes >= self.max_episodes:
            return {"errors": ["Frame shortfall"], "actions": None}
        per_episode = float(self.collected) / max(episodes, 1)
        if per_episode > 0:
            extra = int(math.ceil((target - self.collected) / per_episode))
        else:
            extra = episodes
        extra = max(min(extra, self.max_episodes - episodes), 1)
        actions = [{"dict": self.config_file,
                    "action": {"_inc": {"world.episodes": extra}}}]
        ConfigModder().apply_actions(actions)
        logger.info("Collected {} of {} frames; adding {} episodes".format(
            self.collected, target, extra))
        return {"errors": ["Frame shortfall {}/{}".format(self.collected,
                                                          target)],
                "actions": actions}

    def __str__(self):
        return "FrameShortfallHandler"
