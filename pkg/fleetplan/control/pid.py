# coding: utf-8

"""
PID controllers and the two control laws that follow a refined plan: a
heading-error PID toward an aim waypoint for steering and a speed-error
PID for throttle and brake.
"""

import logging
import math

import numpy as np
from monty.json import MSONable

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)


class PID(MSONable):
    """
    Args:
        kp, ki, kd (float): gains.
        windup (float): bound on the integral accumulator.
    """

    def __init__(self, kp=1.0, ki=0.5, kd=0.2, windup=5.0):
        self.kp = float(kp)
        self.ki = float(ki)
        self.kd = float(kd)
        self.windup = float(windup)
        self.reset()

    def reset(self):
        self.integral = 0.0
        self.prev_error = None

    def step(self, error, dt):
        """
        One update. The derivative term is zero on the first call after a
        reset.
        """
        error = float(error)
        self.integral = float(np.clip(self.integral + error * dt,
                                      -self.windup, self.windup))
        if self.prev_error is None or dt <= 0:
            derivative = 0.0
        else:
            derivative = (error - self.prev_error) / dt
        self.prev_error = error
        return self.kp * error + self.ki * self.integral + \
            self.kd * derivative

    def as_dict(self):
        return {"@module": self.__class__.__module__,
                "@class": self.__class__.__name__,
                "kp": self.kp, "ki": self.ki, "kd": self.kd,
                "windup": self.windup}


def aim_error(tau, aim_index=4):
    """
    Heading angle of the aim waypoint in the ego frame, left positive;
    None for an aim point at the origin.
    """
    tau = np.asarray(tau, dtype=float)
    if len(tau) <= aim_index:
        raise ValueError("Plan has {} waypoints, aim index is {}".format(
            len(tau), aim_index))
    x, y = tau[aim_index]
    if math.hypot(x, y) < 1e-6:
        return None
    return math.atan2(y, x)


def lateral_control(tau, pid, dt, aim_index=4):
    """
    Returns:
        steer in [-1, 1], positive to the left.
    """
    error = aim_error(tau, aim_index)
    if error is None:
        return 0.0
    return float(np.clip(pid.step(error, dt), -1.0, 1.0))


def target_speed(tau, waypoint_dt):
    """
    Mean gap between consecutive waypoints over their spacing in time.
    """
    tau = np.asarray(tau, dtype=float)
    if len(tau) < 2:
        raise ValueError("Plan needs at least two waypoints")
    gaps = np.linalg.norm(np.diff(tau, axis=0), axis=1)
    return float(gaps.mean() / waypoint_dt)


def longitudinal_control(tau, speed, pid, dt, waypoint_dt=0.5):
    """
    Returns:
        (throttle, brake), each in [0, 1].
    """
    out = pid.step(target_speed(tau, waypoint_dt) - float(speed), dt)
    return float(np.clip(out, 0.0, 1.0)), float(np.clip(-out, 0.0, 1.0))
