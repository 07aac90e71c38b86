# coding: utf-8

"""
Utility functions shared by the pipeline stages: artifact backups, execution
host information, deterministic seeding and small numeric helpers.
"""

import hashlib
import json
import logging
import os
import random
import tarfile
import zipfile
from glob import glob

import numpy as np

from monty.json import MontyEncoder

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)


def backup(filenames, prefix="error"):
    """
    Backup files to a tar.gz file. Used, for example, in backing up the
    metrics and checkpoints of a diverged training stage before a correction
    is applied.

    Args:
        filenames ([str]): List of files to backup. Supports wildcards, e.g.,
            checkpoints/*.pt.
        prefix (str): prefix to the files. Defaults to error, which means a
            series of error.1.tar.gz, error.2.tar.gz, ... will be generated.

    Returns:
        Name of the archive written.
    """
    num = max([0] + [int(f.split(".")[-3])
                     for f in glob("{}.*.tar.gz".format(prefix))])
    filename = "{}.{}.tar.gz".format(prefix, num + 1)
    logger.info("Backing up run to {}.".format(filename))
    with tarfile.open(filename, "w:gz") as tar:
        for fname in filenames:
            for f in sorted(glob(fname)):
                tar.add(f)
    return filename


def get_execution_host_info():
    """
    Tries to return a tuple describing the execution host.
    Doesn't work for all queueing systems

    Returns:
        (HOSTNAME, CLUSTER_NAME)
    """
    host = os.environ.get("HOSTNAME", None)
    cluster = os.environ.get("SLURM_CLUSTER_NAME",
                             os.environ.get("SGE_O_HOST", None))
    if host is None:
        try:
            import socket
            host = socket.gethostname()
        except Exception:
            pass
    return host or "unknown", cluster or "unknown"


def data_root(default="."):
    """
    Root directory for driving logs and checkpoints. Taken from the
    FLEETPLAN_DATA environment variable when set.
    """
    return os.environ.get("FLEETPLAN_DATA", default)


def stable_hash(d):
    """
    SHA-1 of the canonical JSON encoding of a (MSONable-friendly) dict.
    """
    s = json.dumps(d, cls=MontyEncoder, sort_keys=True,
                   separators=(",", ":"))
    return hashlib.sha1(s.encode("utf-8")).hexdigest()


def seed_everything(seed):
    """
    Seeds python, numpy and torch generators and returns a numpy Generator.
    """
    random.seed(seed)
    np.random.seed(seed % (2 ** 32))
    try:
        import torch
        torch.manual_seed(seed)
    except ImportError:
        pass
    return np.random.default_rng(seed)


def save_npz(filename, arrays):
    """
    Writes arrays to a compressed .npz readable by numpy.load. Entries carry
    a fixed timestamp so equal arrays give byte-identical files.
    """
    with zipfile.ZipFile(filename, "w", compression=zipfile.ZIP_DEFLATED) \
            as zf:
        for k in sorted(arrays):
            info = zipfile.ZipInfo(k + ".npy", date_time=(1980, 1, 1, 0, 0, 0))
            info.compress_type = zipfile.ZIP_DEFLATED
            with zf.open(info, "w") as f:
                np.lib.format.write_array(f, np.asanyarray(arrays[k]),
                                          allow_pickle=False)


def load_npz(filename):
    with np.load(filename, allow_pickle=False) as z:
        return {k: z[k] for k in z.files}
