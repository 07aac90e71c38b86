# coding: utf-8

"""
Frames of recorded driving logs as training samples.
"""

import logging

from torch.utils.data import Dataset

from fleetplan.perception.frames import rotation_augment, stack_scans
from fleetplan.perception.pillars import SparsePillars, pillarize, point_paint

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)


def perception_inputs(frame, spec):
    """
    Painted and pillarized sensor input of one frame.
    """
    return pillarize(point_paint(frame["points"], frame["point_scores"]),
                     spec)


def batch_inputs(frames, spec):
    return SparsePillars.collate([perception_inputs(f, spec) for f in frames])


class FrameDataset(Dataset):
    """
    Every frame of a list of DrivingLogs.

    Args:
        logs ([DrivingLog]): complete logs.
        spec (GridSpec): perception grid, used by the augmentation.
        temporal_frames (int): scans concatenated per sample; earlier scans
            are re-expressed in the current EKF pose.
        theta_max (float): rotation augmentation range; 0 disables it.
    """

    def __init__(self, logs, spec, temporal_frames=1, theta_max=0.0):
        if not logs:
            raise ValueError("No driving logs to train on")
        self.logs = list(logs)
        self.spec = spec
        self.temporal_frames = max(int(temporal_frames), 1)
        self.theta_max = float(theta_max)
        self.index = [(i, j) for i, log in enumerate(self.logs)
                      for j in range(len(log))]
        if not self.index:
            raise ValueError("The driving logs hold no frames")

    def __len__(self):
        return len(self.index)

    def _load(self, i, j):
        return self.logs[i].load_frame(j)

    def frame(self, k):
        """
        The k-th frame with earlier scans concatenated, without
        augmentation.
        """
        i, j = self.index[k]
        frame = self._load(i, j)
        if self.temporal_frames > 1:
            first = max(j - self.temporal_frames + 1, 0)
            history = [self._load(i, t) for t in range(first, j)]
            frame["points"], frame["point_scores"] = stack_scans(
                history + [frame])
        return frame

    def __getitem__(self, k):
        return self.frame(k)

    def sample(self, rng, batch_size, augment=False):
        """
        A random batch of frames, rotated by angles drawn uniformly from
        [-theta_max, theta_max] when augment is set.
        """
        idx = rng.integers(len(self), size=batch_size)
        frames = [self.frame(int(k)) for k in idx]
        if augment and self.theta_max > 0:
            thetas = rng.uniform(-self.theta_max, self.theta_max,
                                 size=batch_size)
            frames = [rotation_augment(f, float(t), self.spec)
                      for f, t in zip(frames, thetas)]
        return frames

    def batches(self, batch_size):
        """
        Consecutive batches over every frame, in order.
        """
        for start in range(0, len(self), batch_size):
            yield [self.frame(k) for k in
                   range(start, min(start + batch_size, len(self)))]
