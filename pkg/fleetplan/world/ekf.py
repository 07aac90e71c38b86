# coding: utf-8

"""
Extended Kalman filter smoothing the ego pose from noisy GNSS positions,
IMU yaw and an optional speedometer reading.
"""

import logging

import numpy as np
from monty.json import MSONable

from fleetplan.geometry import wrap

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)


class PoseBelief(MSONable):
    """
    Gaussian belief over (x, y, yaw, v).
    """

    def __init__(self, mean, cov):
        self.mean = np.asarray(mean, dtype=float).reshape(4)
        self.cov = np.asarray(cov, dtype=float).reshape(4, 4)

    @classmethod
    def initial(cls, x, y, yaw, v=0.0, std=(3.0, 3.0, 0.5, 3.0)):
        return cls([x, y, yaw, v], np.diag(np.square(std)))

    def is_psd(self, tol=1e-9):
        if not np.all(np.isfinite(self.cov)):
            return False
        if not np.allclose(self.cov, self.cov.T, atol=1e-9):
            return False
        scale = max(1.0, float(np.abs(np.trace(self.cov))))
        return bool(np.linalg.eigvalsh(self.cov).min() >= -tol * scale)

    @property
    def pose(self):
        return self.mean[:3].copy()

    def as_dict(self):
        return {"@module": self.__class__.__module__,
                "@class": self.__class__.__name__,
                "mean": self.mean.tolist(), "cov": self.cov.tolist()}


def ekf_step(belief, gnss, imu_yaw, dt, process_noise=(0.05, 0.05, 0.01, 0.2),
             gnss_std=1.0, yaw_std=0.05, speed=None, speed_std=0.1):
    """
    Constant-velocity-and-yaw prediction followed by a GNSS/IMU (and
    optionally speed) update in Joseph form.

    Args:
        belief (PoseBelief): prior; its covariance must be PSD.
        gnss ((2,)): measured position.
        imu_yaw (float): measured yaw.
        dt (float): time since the prior.
        process_noise: per-state noise std per sqrt(second).
        gnss_std, yaw_std, speed_std: measurement noise stds.
        speed (float): optional speedometer reading.

    Returns:
        PoseBelief
    """
    if not belief.is_psd():
        raise ValueError("Belief covariance is not positive semi-definite")
    x, y, yaw, v = belief.mean
    c, s = np.cos(yaw), np.sin(yaw)
    mean = np.array([x + v * c * dt, y + v * s * dt, yaw, v])
    F = np.array([[1.0, 0.0, -v * s * dt, c * dt],
                  [0.0, 1.0, v * c * dt, s * dt],
                  [0.0, 0.0, 1.0, 0.0],
                  [0.0, 0.0, 0.0, 1.0]])
    Q = np.diag(np.square(process_noise)) * dt
    P = F @ belief.cov @ F.T + Q

    z = [gnss[0], gnss[1], imu_yaw]
    rows = [0, 1, 2]
    r = [gnss_std ** 2, gnss_std ** 2, yaw_std ** 2]
    if speed is not None:
        z.append(speed)
        rows.append(3)
        r.append(speed_std ** 2)
    H = np.zeros((len(rows), 4))
    H[np.arange(len(rows)), rows] = 1.0
    R = np.diag(r)
    innov = np.asarray(z, dtype=float) - H @ mean
    innov[2] = wrap(innov[2])
    S = H @ P @ H.T + R
    K = np.linalg.solve(S, H @ P).T
    mean = mean + K @ innov
    mean[2] = wrap(mean[2])
    A = np.eye(4) - K @ H
    P = A @ P @ A.T + K @ R @ K.T
    P = 0.5 * (P + P.T)
    return PoseBelief(mean, P)
