# coding: utf-8

import logging
import os

from monty.serialization import loadfn

from fleetplan.harness.matrix import REPORT_JSON
from fleetplan.pipeline import Validator

"""
Validators for evaluation reports.
"""

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)


class ReportValidator(Validator):
    """
    Checks that report.json exists, that at least one config was evaluated
    on min_episodes episodes or more, and that every mean score lies in its
    range with DS <= RC.
    """

    def __init__(self, report_dir="reports", min_episodes=1):
        self.report_dir = report_dir
        self.min_episodes = min_episodes

    def check(self):
        fname = os.path.join(self.report_dir, REPORT_JSON)
        if not os.path.exists(fname):
            logger.error("No report at {}".format(fname))
            return True
        try:
            report = loadfn(fname)
        except Exception:
            logger.error("Unreadable report {}".format(fname))
            return True
        if not report.get("configs"):
            logger.error("Report {} evaluated no config".format(fname))
            return True
        for name, c in report["configs"].items():
            if c["episodes"] < self.min_episodes:
                logger.error("{}: {} episodes, expected {}".format(
                    name, c["episodes"], self.min_episodes))
                return True
            m = c["mean"]
            if not (0 <= m["RC"] <= 1 and 0 < m["IS"] <= 1 and
                    0 <= m["DS"] <= m["RC"] + 1e-9):
                logger.error("{}: scores out of range {}".format(name, m))
                return True
        return False

    def __str__(self):
        return "ReportValidator"
