# coding: utf-8

"""
Checkpoints of trained networks. A checkpoint holds the state dicts of
named modules together with the GridSpec, the RunConfig and its hash, the
command ordering, n and K, so a reader can reject one built for another
grid.
"""

import logging
import os

import torch

from fleetplan.config import COMMANDS, RunConfig
from fleetplan.perception.pillars import GridSpec

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)


def save_checkpoint(filename, modules, spec, cfg, n=10, **extra):
    """
    Args:
        filename (str): output path; parent directories are created.
        modules (dict): name -> nn.Module.
        spec (GridSpec): grid the modules were trained on.
        cfg (RunConfig): run configuration.
        extra: additional JSON-like entries, e.g. in_channels.
    """
    d = os.path.dirname(filename)
    if d and not os.path.isdir(d):
        os.makedirs(d)
    payload = {"state": {k: m.state_dict() for k, m in modules.items()},
               "grid": spec.as_dict(),
               "config": cfg.as_dict(),
               "config_hash": cfg.hash(),
               "commands": list(COMMANDS),
               "n": n,
               "K": cfg.planner.K}
    payload.update(extra)
    torch.save(payload, filename)
    logger.info("Wrote checkpoint {} ({})".format(filename,
                                                   ", ".join(sorted(modules))))
    return filename


def load_checkpoint(filename, spec=None):
    """
    Reads a checkpoint onto the CPU.

    Raises:
        FileNotFoundError: no such file.
        ValueError: spec given and different from the stored GridSpec, or
            a different command ordering.
    """
    if not os.path.exists(filename):
        raise FileNotFoundError("checkpoint not found: {}".format(filename))
    ckpt = torch.load(filename, map_location="cpu", weights_only=False)
    ckpt["grid"] = GridSpec.from_dict(ckpt["grid"])
    ckpt["config"] = RunConfig.from_dict(ckpt["config"])
    if spec is not None and ckpt["grid"] != spec:
        raise ValueError("Checkpoint {} was trained on {}, not {}".format(
            filename, ckpt["grid"], spec))
    if tuple(ckpt["commands"]) != COMMANDS:
        raise ValueError("Checkpoint {} uses command order {}".format(
            filename, ckpt["commands"]))
    return ckpt


def restore(module, ckpt, name):
    if name not in ckpt["state"]:
        raise ValueError("Checkpoint lacks {}".format(name))
    module.load_state_dict(ckpt["state"][name])
    return module
