# coding: utf-8

"""
VehicleController: refined plan in, steer/throttle/brake out, with the
brake classifier override and the collision gate's hard stop on top.
"""

import logging

from fleetplan.control.gate import GateDecision, collision_gate
from fleetplan.control.pid import PID, lateral_control, longitudinal_control
from fleetplan.world.state import Control

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)


def brake_override(control, brake_score, threshold=0.5):
    """
    Raises the brake to the classifier score when that is larger; a final
    brake above threshold cuts the throttle.
    """
    brake_score = float(brake_score)
    if not 0.0 <= brake_score <= 1.0:
        raise ValueError("Brake score {} outside [0, 1]".format(brake_score))
    brake = max(control.brake, brake_score)
    throttle = 0.0 if brake > threshold else control.throttle
    return Control(control.steer, throttle, brake)


def hard_stop(control):
    return Control(control.steer, 0.0, 1.0)


class VehicleController(object):
    """
    Per-episode controller state. Build one per episode; the PIDs are not
    shared.

    Args:
        dt (float): control period in s.
        waypoint_dt (float): time between plan waypoints in s.
    """

    def __init__(self, dt=0.1, waypoint_dt=0.5, lateral_gains=(1.0, 0.5, 0.2),
                 longitudinal_gains=(5.0, 0.5, 1.0), windup=5.0, aim_index=4,
                 likelihood_threshold=0.2, inflation=0.25,
                 brake_threshold=0.5, ego_extent=(2.25, 1.0)):
        self.dt = dt
        self.waypoint_dt = waypoint_dt
        self.lateral = PID(*lateral_gains, windup=windup)
        self.longitudinal = PID(*longitudinal_gains, windup=windup)
        self.aim_index = aim_index
        self.likelihood_threshold = likelihood_threshold
        self.inflation = inflation
        self.brake_threshold = brake_threshold
        self.ego_extent = tuple(ego_extent)

    @classmethod
    def from_config(cls, cfg):
        c = cfg.control
        return cls(cfg.world.dt, cfg.waypoint_dt, c.lateral_gains,
                   c.longitudinal_gains, c.windup, c.aim_index,
                   c.likelihood_threshold, c.inflation, c.brake_threshold,
                   cfg.world.vehicle_extent)

    def reset(self):
        self.lateral.reset()
        self.longitudinal.reset()

    def run_step(self, tau, speed, brake_score=None, neighbours=()):
        """
        Args:
            tau ((n, 2)): refined ego plan in the ego frame.
            speed (float): current ego speed.
            brake_score (float): brake classifier output, if any.
            neighbours ([NeighbourPlans]): plans of other vehicles.

        Returns:
            (Control, GateDecision)
        """
        steer = lateral_control(tau, self.lateral, self.dt, self.aim_index)
        throttle, brake = longitudinal_control(tau, speed, self.longitudinal,
                                               self.dt, self.waypoint_dt)
        control = Control(steer, throttle, brake)
        if brake_score is not None:
            control = brake_override(control, brake_score,
                                     self.brake_threshold)
        gate = GateDecision()
        if neighbours:
            gate = collision_gate(tau, neighbours, self.likelihood_threshold,
                                  self.inflation, self.ego_extent)
            if gate.hard_stop:
                logger.debug("Hard stop for {}".format(gate.culprits))
                control = hard_stop(control)
        return control, gate
