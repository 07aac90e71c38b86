# coding: utf-8

"""
Closed-loop episodes: a policy drives the ego through the micro-world until
the route ends, the time budget runs out or the ego is blocked. Every tick
is logged with the policy internals and the infraction events it caused.
"""

import logging
import math

import numpy as np
from shapely.geometry import Polygon

from fleetplan.config import RunConfig
from fleetplan.geometry import rectangles_overlap
from fleetplan.world.recorder import DrivingLog
from fleetplan.world.state import CLASS_NAMES, EGO_ID, step_world
from fleetplan.world.traffic import initial_state

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)

TICK_FIELDS = ("time", "ego_pose", "ego_speed", "action", "progress",
               "distance", "offroad_distance", "events")
INTERNAL_FIELDS = ("detections", "plans", "likelihoods", "refined", "gate",
                   "brake_score")
# Collisions below this ego speed are not the ego's fault.
MIN_COLLISION_SPEED = 0.1
END_TOLERANCE = 1.0


def event_array(events):
    return np.array(list(events), dtype="<U16")


class EpisodeLog(object):
    """
    Meta plus one record per tick, stored in the DrivingLog container
    (meta.json and frame_XXXXXX.npz).
    """

    def __init__(self, meta=None, ticks=None):
        self.meta = meta if meta is not None else {}
        self.ticks = list(ticks or [])

    @property
    def complete(self):
        return bool(self.meta.get("complete", False))

    @property
    def status(self):
        return self.meta.get("status")

    def __len__(self):
        return len(self.ticks)

    def append(self, record):
        self.ticks.append(record)

    def finish(self, status):
        self.meta["status"] = status
        self.meta["complete"] = True
        self.meta["frames"] = len(self.ticks)

    def save(self, path):
        if not self.complete:
            raise ValueError("Only finished episodes can be saved")
        log = DrivingLog.create(path, self.meta)
        log.write(self.ticks)
        return path

    @classmethod
    def load(cls, path):
        log = DrivingLog.open(path)
        return cls(dict(log.meta), list(log))


class InfractionMonitor(object):
    """
    Turns consecutive world states into infraction events. Collisions and
    layout contacts count once per contact; a contact is only charged while
    the ego moves.
    """

    def __init__(self, roadmap, route, blocked_time=60.0,
                 blocked_distance=1.0):
        self.roadmap = roadmap
        self.stops = route.stops(roadmap)
        self.blocked_time = blocked_time
        self.blocked_distance = blocked_distance
        self.contacts = set()
        self.on_obstacle = False
        self.offroad = False
        self.anchor = (0.0, 0.0)

    def reset(self, progress, time):
        self.anchor = (progress, time)

    def update(self, prev, state, prev_progress, progress):
        """
        Returns:
            (events, distance driven, distance driven off-road)
        """
        ego = state.ego
        events = []
        moving = ego.speed >= MIN_COLLISION_SPEED
        box = ego.corners()
        contacts = set()
        for a in state.actors:
            if a.actor_id == EGO_ID:
                continue
            if bool(rectangles_overlap(box, a.corners())):
                contacts.add(a.actor_id)
                if a.actor_id not in self.contacts and moving:
                    events.append(CLASS_NAMES[a.kind])
        self.contacts = contacts

        footprint = Polygon(box)
        hit = any(footprint.intersects(o) for o in self.roadmap.obstacles)
        if hit and not self.on_obstacle and moving:
            events.append("layout")
        self.on_obstacle = hit

        for s_stop, light in self.stops:
            if prev_progress < s_stop <= progress and \
                    light.phase(prev.time) == "red":
                events.append("red_light")

        distance = float(np.linalg.norm(ego.xy - prev.ego.xy))
        offroad = 0.0
        rm = self.roadmap
        if not rm.is_empty and not bool(rm.is_drivable(ego.x, ego.y)):
            offroad = distance
            if not self.offroad:
                events.append("offroad")
            self.offroad = True
        else:
            self.offroad = False

        s0, t0 = self.anchor
        if progress > s0 + self.blocked_distance:
            self.anchor = (progress, state.time)
        elif state.time - t0 >= self.blocked_time - 1e-9:
            events.append("blocked")
        return events, distance, offroad


def tick_record(state, control, progress, events, distance=0.0,
                offroad=0.0, internals=None):
    ego = state.ego
    rec = {"time": np.float64(state.time), "ego_pose": ego.pose,
           "ego_speed": np.float64(ego.speed),
           "action": control.as_array(),
           "progress": np.float64(progress),
           "distance": np.float64(distance),
           "offroad_distance": np.float64(offroad),
           "events": event_array(events)}
    for k, v in (internals or {}).items():
        if k in INTERNAL_FIELDS and v is not None:
            rec[k] = np.asarray(v)
    return rec


def time_budget_for(route, cfg):
    h = cfg.harness
    return route.length / h.time_budget_speed + h.time_budget_slack


def run_episode(policy, route=None, scenarios=(), seed=0, time_budget=None,
                cfg=None, roadmap=None):
    """
    Drives policy along route until the route end, budget expiry or a
    terminal blocked event. Collisions do not end the episode.

    Args:
        policy (Policy): the driver.
        route (Route): route to drive; sampled from the seed if None.
        scenarios ([str]): dangerous scenarios to inject.
        seed (int): episode seed; equal seeds give equal logs.
        time_budget (float): seconds; defaults to the route length over
            harness.time_budget_speed plus harness.time_budget_slack.
        cfg (RunConfig): configuration, defaults if None.
        roadmap (RoadMap): map to use instead of the configured one.

    Returns:
        a finished EpisodeLog.
    """
    cfg = cfg or RunConfig()
    h, w = cfg.harness, cfg.world
    state, route = initial_state(cfg, seed, scenarios, roadmap, route)
    budget = time_budget if time_budget is not None else \
        time_budget_for(route, cfg)
    meta = {"seed": int(seed), "scenarios": list(scenarios),
            "route": route.as_dict(), "route_length": route.length,
            "map": state.roadmap.spec, "dt": w.dt, "time_budget": budget,
            "penalties": dict(h.penalties), "policy": policy.name,
            "config": cfg.as_dict(), "config_hash": cfg.hash()}
    log = EpisodeLog(meta)
    monitor = InfractionMonitor(state.roadmap, route, h.blocked_time,
                                h.blocked_distance)
    progress = route.progress(state.ego.xy)
    monitor.reset(progress, state.time)
    policy.reset(state, route)
    status = "timeout"
    for _ in range(int(math.ceil(budget / w.dt - 1e-9))):
        try:
            control, internals = policy.act(state, route, progress)
            if not control.is_finite():
                raise ValueError("Non-finite control {}".format(control))
        except Exception as ex:
            logger.warning("Policy {} failed at t={:.1f}: {}".format(
                policy.name, state.time, ex))
            log.append(tick_record(state, state.ego.control, progress,
                                   ["blocked"]))
            status = "policy_error"
            break
        nxt = step_world(state, {EGO_ID: control}, w.dt)
        new_progress = route.progress(nxt.ego.xy, progress)
        events, distance, offroad = monitor.update(state, nxt, progress,
                                                   new_progress)
        log.append(tick_record(nxt, control, new_progress, events, distance,
                               offroad, internals))
        state, progress = nxt, new_progress
        if "blocked" in events:
            status = "blocked"
            break
        if progress >= route.length - END_TOLERANCE:
            status = "completed"
            break
    log.finish(status)
    logger.info("Episode seed {} ended {} at {:.1f}/{:.1f} m".format(
        seed, status, progress, route.length))
    return log
