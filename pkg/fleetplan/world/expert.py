# coding: utf-8

"""
The scripted autopilot: pure-pursuit lane following with time-to-collision
braking for leads and pedestrians, and stop-line braking for lights. The
same driver moves scripted traffic and produces the expert labels used for
imitation.
"""

import logging
import math

import numpy as np

from fleetplan.geometry import to_local, wrap
from fleetplan.world.state import Control, OffRoadError, PEDESTRIAN, VEHICLE

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)

FEATURE_RANGE = 30.0
SPEED_SCALE = 10.0
N_FEATURES = 7


class DriveInfo(object):
    """
    What the driver saw on its path: nearest relevant light, lead vehicle
    and pedestrian, and why it braked.
    """

    def __init__(self):
        self.light_distance = None
        self.light_phase = None
        self.lead_gap = None
        self.pedestrian_gap = None
        self.brake_reason = None

    def features(self, speed):
        """
        The seven privileged features: red light ahead, light distance,
        lead present, lead distance, pedestrian present, pedestrian
        distance and speed, distances scaled by FEATURE_RANGE.
        """
        def scaled(d):
            if d is None or d > FEATURE_RANGE:
                return 0.0, 1.0
            return 1.0, max(d, 0.0) / FEATURE_RANGE

        red = self.light_phase in ("red", "yellow")
        light_on, light_d = scaled(self.light_distance if red else None)
        lead_on, lead_d = scaled(self.lead_gap)
        ped_on, ped_d = scaled(self.pedestrian_gap)
        return np.array([light_on, light_d, lead_on, lead_d, ped_on, ped_d,
                         speed / SPEED_SCALE], dtype=np.float32)


def _hazards(state, actor, path, s, horizon=40.0):
    """
    Gaps along path to the nearest vehicle and pedestrian in the driving
    corridor ahead of actor, with the lead's speed.
    """
    lead, lead_speed, ped = None, 0.0, None
    for other in state.actors:
        if other.actor_id == actor.actor_id:
            continue
        if np.linalg.norm(other.xy - actor.xy) > horizon + 10.0:
            continue
        so, lat = path.project(other.xy, s, s + horizon)
        if so <= s:
            continue
        margin = 0.6 if other.kind == VEHICLE else 1.2
        if abs(lat) > actor.hw + other.hw + margin:
            continue
        gap = so - s - actor.hl - other.hl
        if other.kind == PEDESTRIAN:
            if ped is None or gap < ped:
                ped = gap
        elif lead is None or gap < lead:
            heading = path.interpolate(so)[1]
            lead = gap
            lead_speed = other.speed * math.cos(wrap(other.yaw - heading))
    return lead, lead_speed, ped


def drive(state, actor, path, s, stops=(), target_speed=6.0, ttc=3.0,
          ignore_lights=False, stop_at=None):
    """
    One control decision for actor following path.

    Args:
        state (WorldState): the world.
        actor (ActorState): the driven vehicle.
        path (Polyline): the path to follow.
        s (float): actor's progress on path.
        stops ([(s, TrafficLight)]): stop-line crossings on path.
        target_speed (float): cruise speed in m/s.
        ttc (float): time-to-collision threshold in s.
        ignore_lights (bool): run red lights.
        stop_at (float): arc length at which to stop regardless.

    Returns:
        (Control, brake_label, DriveInfo)
    """
    dyn = state.dynamics
    v = actor.speed
    info = DriveInfo()

    ld = float(np.clip(2.5 + 0.6 * v, 3.0, 10.0))
    target, _ = path.interpolate(s + ld)
    local = to_local(target, actor.pose)
    alpha = math.atan2(local[1], local[0])
    delta = math.atan2(2.0 * dyn.wheelbase * math.sin(alpha), ld)
    steer = float(np.clip(delta / dyn.max_steer, -1.0, 1.0))

    stop_gap = None
    for s_stop, light in stops:
        d = s_stop - s - actor.hl
        if d < -actor.hl:
            continue
        phase = light.phase(state.time)
        info.light_distance, info.light_phase = d, phase
        if not ignore_lights and phase != "green" and d > -0.5:
            reach = max(v * v / (2.0 * 0.5 * dyn.max_decel) + 4.0, 12.0)
            can_stop = d > v * v / (2.0 * dyn.max_decel)
            if d < reach and (phase == "red" or can_stop):
                stop_gap = max(d, 0.0)
                info.brake_reason = "light"
        break

    lead, lead_speed, ped = _hazards(state, actor, path, s)
    info.lead_gap, info.pedestrian_gap = lead, ped
    for gap, other_v, reason in ((lead, lead_speed, "lead"),
                                 (ped, 0.0, "pedestrian")):
        if gap is None:
            continue
        closing = v - other_v
        if gap < 3.0 + 1.5 * v or (closing > 0.1 and gap / closing < ttc):
            if stop_gap is None or gap < stop_gap:
                stop_gap = max(gap - 2.0, 0.0)
                info.brake_reason = reason

    if stop_at is not None and s >= stop_at:
        stop_gap = 0.0
        info.brake_reason = info.brake_reason or "script"

    if stop_gap is not None:
        need = v * v / (2.0 * max(stop_gap, 0.5))
        brake = float(np.clip(need / dyn.max_decel, 0.3, 1.0))
        label = int(info.brake_reason in ("light", "lead", "pedestrian"))
        return Control(steer, 0.0, brake), label, info

    _, h0 = path.interpolate(s)
    _, h1 = path.interpolate(s + 12.0)
    speed = target_speed
    if abs(wrap(h1 - h0)) > 0.3:
        speed = min(speed, 4.0)
    err = speed - v
    throttle = float(np.clip(0.6 * err, 0.0, 1.0))
    brake = float(np.clip(-0.3 * err, 0.0, 0.3)) if err < -0.5 else 0.0
    return Control(steer, throttle, brake), 0, info


def expert_step(state, route, progress=None, target_speed=6.0, ttc=3.0):
    """
    The ego expert's decision with the full DriveInfo.

    Raises:
        OffRoadError if the ego centre left the drivable area.
    """
    ego = state.ego
    rm = state.roadmap
    if not rm.is_empty and not bool(rm.is_drivable(ego.x, ego.y)):
        raise OffRoadError("Ego off the drivable area at ({:.2f}, {:.2f})"
                           .format(ego.x, ego.y))
    s = route.progress(ego.xy, progress)
    return drive(state, ego, route.path, s, route.stops(rm), target_speed,
                 ttc)


def expert_policy(state, route, progress=None, target_speed=6.0, ttc=3.0):
    """
    Returns:
        (Control, brake_label) of the scripted expert for the ego.
    """
    control, label, _ = expert_step(state, route, progress, target_speed, ttc)
    return control, label
