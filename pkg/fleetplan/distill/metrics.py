# coding: utf-8

"""
Line-delimited JSON training metrics. Each record holds the stage, the
step, the wall time and every loss term; error handlers read them back.
"""

import json
import logging
import os
import time

from monty.json import MontyEncoder

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)


class MetricsLog(object):
    """
    Args:
        filename (str): metrics file, truncated on open; None disables
            writing.
        stage (str): stage name stored in every record.
        every (int): write every n-th step; the last step is always written
            through close.
    """

    def __init__(self, filename, stage, every=1):
        self.filename = filename
        self.stage = stage
        self.every = max(int(every), 1)
        self.start = time.time()
        self.last = None
        self.records = 0
        if filename:
            d = os.path.dirname(filename)
            if d and not os.path.isdir(d):
                os.makedirs(d)
            open(filename, "w").close()

    def write(self, step, loss, terms=None, **extra):
        rec = {"stage": self.stage, "step": int(step),
               "wall_time": round(time.time() - self.start, 3),
               "loss": float(loss)}
        for k, v in (terms or {}).items():
            rec[k] = float(v)
        rec.update(extra)
        self.last = rec
        if step % self.every == 0:
            self._append(rec)
        return rec

    def _append(self, rec):
        self.records += 1
        if not self.filename:
            return
        with open(self.filename, "a") as f:
            f.write(json.dumps(rec, cls=MontyEncoder, sort_keys=True) + "\n")

    def close(self):
        if self.last is not None and self.last["step"] % self.every != 0:
            self._append(self.last)


def read_metrics(filename):
    """
    Records of a metrics file; unparseable lines are skipped.
    """
    out = []
    if not os.path.exists(filename):
        return out
    with open(filename) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            try:
                out.append(json.loads(line))
            except ValueError:
                logger.warning("Bad metrics line in {}".format(filename))
    return out
