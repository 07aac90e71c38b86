# coding: utf-8

"""
Pipeline stage of the closed-loop evaluation.
"""

import logging

from fleetplan.harness.matrix import run_matrix, write_report
from fleetplan.pipeline import ConfigStage

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)


class EvaluateJob(ConfigStage):
    """
    Runs the evaluation matrix and writes report.json and report.txt under
    <workdir>/<report_dir>. Without explicit entries the student and brake
    checkpoints of the workdir are evaluated as one config named "student".
    """

    def __init__(self, config_file="config.yaml", workdir=".",
                 overrides=None, entries=None,
                 student="checkpoints/student.pt",
                 brake="checkpoints/brake.pt", report_dir="reports",
                 save_logs=False, routes=None, presets=None, seeds=None):
        """
        Args:
            entries ([dict]): matrix entries, see run_matrix. Checkpoint
                paths are relative to workdir.
            save_logs (bool): keep every EpisodeLog under
                <report_dir>/episodes.
            routes, presets, seeds: matrix axes; harness defaults if None.
        """
        super(EvaluateJob, self).__init__(config_file, workdir, overrides)
        self.entries = entries
        self.student = student
        self.brake = brake
        self.report_dir = report_dir
        self.save_logs = save_logs
        self.routes = routes
        self.presets = presets
        self.seeds = seeds
        self.summary = None

    def resolved_entries(self):
        entries = self.entries or [{"name": "student", "policy": "learned",
                                    "student": self.student,
                                    "brake": self.brake}]
        out = []
        for e in entries:
            e = dict(e)
            for k in ("student", "brake"):
                if e.get(k):
                    e[k] = self.path(e[k])
            out.append(e)
        return out

    def run(self):
        out = self.path(self.report_dir)
        logs = self.path(self.report_dir, "episodes") if self.save_logs \
            else None
        report = run_matrix(self.resolved_entries(), self.cfg, self.routes,
                            self.presets, self.seeds, logs_dir=logs)
        write_report(report, out)
        self.summary = {name: c["mean"] for name, c in
                        report["configs"].items()}
        self.summary["skipped"] = [s["config"] for s in report["skipped"]]
        return self.summary

    def as_dict(self):
        d = super(EvaluateJob, self).as_dict()
        d.pop("summary", None)
        return d
