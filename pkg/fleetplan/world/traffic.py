# coding: utf-8

"""
Scripted traffic, pedestrians and the dangerous-scenario library, plus the
construction of an episode's initial world.
"""

import logging

import numpy as np

from fleetplan.geometry import Polyline
from fleetplan.world.expert import drive
from fleetplan.world.roadmap import map_from_config
from fleetplan.world.route import (FOLLOW_LANE, Route, route_from_config,
                                   sample_route)
from fleetplan.world.state import (ActorState, Control, Dynamics, EGO_ID,
                                   PEDESTRIAN, VEHICLE, WorldState)

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)

SCENARIOS = ("crossing-pedestrian", "lane-changer", "lead-brake",
             "red-light-runner")


class VehicleScript(object):
    """
    Drives a traffic vehicle along a route with the expert driver.

    Args:
        route (Route): path to follow.
        target_speed (float): cruise speed.
        ignore_lights (bool): run red lights.
        stop_at (float): arc length at which the vehicle brakes to a stop.
        trigger (float): stay parked until the ego is this close.
    """

    def __init__(self, route, target_speed=6.0, ignore_lights=False,
                 stop_at=None, trigger=None, ttc=3.0):
        self.route = route
        self.target_speed = target_speed
        self.ignore_lights = ignore_lights
        self.stop_at = stop_at
        self.trigger = trigger
        self.ttc = ttc

    def _waiting(self, state, actor):
        if self.trigger is None or actor.speed > 0 or actor.s > 0.05:
            return False
        return np.linalg.norm(state.ego.xy - actor.xy) > self.trigger

    def act(self, state, actor):
        if self._waiting(state, actor):
            return Control(0.0, 0.0, 1.0)
        if actor.s >= self.route.length - 0.5:
            return Control(0.0, 0.0, 1.0)
        control, _, _ = drive(state, actor, self.route.path, actor.s,
                              self.route.stops(state.roadmap),
                              self.target_speed, self.ttc,
                              ignore_lights=self.ignore_lights,
                              stop_at=self.stop_at)
        return control

    def progress(self, actor, s):
        return self.route.progress(actor.xy, s)


class PedestrianScript(object):
    """
    Walks a polyline at constant speed, optionally waiting until the ego is
    within trigger m.
    """

    def __init__(self, points, speed=1.4, trigger=None):
        self.path = Polyline(points)
        self.speed = speed
        self.trigger = trigger

    def advance(self, state, actor, dt):
        new = actor.copy()
        if self.trigger is not None and actor.s <= 0.0:
            if np.linalg.norm(state.ego.xy - actor.xy) > self.trigger:
                new.speed = 0.0
                return new
        s = min(actor.s + self.speed * dt, self.path.length)
        xy, heading = self.path.interpolate(s)
        new.x, new.y = float(xy[0]), float(xy[1])
        new.yaw = float(heading)
        new.s = s
        new.speed = self.speed if s < self.path.length else 0.0
        return new


def _free(xy, actors, clearance=10.0):
    return all(np.linalg.norm(a.xy - xy) > clearance for a in actors)


def _vehicle(actor_id, route, s, extent, script):
    xy, h = route.path.interpolate(s)
    return ActorState(actor_id, VEHICLE, xy[0], xy[1], h, 0.0, extent[0],
                      extent[1], script=script, s=s)


def spawn_traffic(roadmap, rng, actors, n_vehicles, n_pedestrians,
                  vehicle_extent=(2.25, 1.0), pedestrian_extent=(0.3, 0.3),
                  target_speed=6.0, pedestrian_speed=1.4, lane_width=3.5):
    """
    Adds scripted vehicles on random lanes and pedestrians crossing random
    roads, keeping 10 m clearance to existing actors.

    Returns:
        New actor list (input actors first).
    """
    actors = list(actors)
    next_id = max([a.actor_id for a in actors] + [0]) + 1
    for _ in range(n_vehicles):
        for _ in range(20):
            r = sample_route(roadmap, rng, length_range=(80.0, 300.0),
                             lane_change_prob=0.0)
            if _free(r.path.points[0], actors):
                speed = target_speed * rng.uniform(0.7, 1.0)
                actors.append(_vehicle(next_id, r, 0.0, vehicle_extent,
                                       VehicleScript(r, speed)))
                next_id += 1
                break
    lanes = [l for l in roadmap.lanes.values() if not l.is_connector]
    for _ in range(n_pedestrians):
        if not lanes:
            break
        lane = lanes[rng.integers(len(lanes))]
        xy, h = lane.path.interpolate(rng.uniform(0.2, 0.8) * lane.length)
        normal = np.array([-np.sin(h), np.cos(h)])
        half = 2 * lane_width + 2.0
        a, b = xy - normal * half, xy + normal * half
        if rng.random() < 0.5:
            a, b = b, a
        if not _free(a, actors, 5.0):
            continue
        script = PedestrianScript(np.stack([a, b]), pedestrian_speed,
                                  trigger=rng.uniform(10.0, 40.0))
        actors.append(ActorState(next_id, PEDESTRIAN, a[0], a[1],
                                 np.arctan2(*(b - a)[::-1]), 0.0,
                                 pedestrian_extent[0], pedestrian_extent[1],
                                 script=script))
        next_id += 1
    return actors


def inject_scenario(name, roadmap, route, actors, rng, s_ego=0.0,
                    vehicle_extent=(2.25, 1.0), pedestrian_extent=(0.3, 0.3),
                    lane_width=3.5):
    """
    Adds the actors of one dangerous scenario ahead of the ego on its route.

    Returns:
        New actor list; unchanged if the route offers no place for it.
    """
    if name not in SCENARIOS:
        raise ValueError("Unknown scenario {}".format(name))
    actors = list(actors)
    next_id = max([a.actor_id for a in actors] + [0]) + 1
    if name == "crossing-pedestrian":
        s = min(s_ego + rng.uniform(30.0, 45.0), route.length - 5.0)
        xy, h = route.path.interpolate(s)
        normal = np.array([-np.sin(h), np.cos(h)])
        a, b = xy - normal * (lane_width + 3.0), xy + normal * \
            (lane_width + 3.0)
        script = PedestrianScript(np.stack([a, b]), 1.8, trigger=20.0)
        actors.append(ActorState(next_id, PEDESTRIAN, a[0], a[1],
                                 np.arctan2(normal[1], normal[0]), 0.0,
                                 pedestrian_extent[0], pedestrian_extent[1],
                                 script=script))
    elif name == "lane-changer":
        s = s_ego + rng.uniform(12.0, 20.0)
        if s > route.length - 30.0:
            logger.info("Route too short for lane-changer")
            return actors
        xy, h = route.path.interpolate(s)
        normal = np.array([-np.sin(h), np.cos(h)])
        for side in (-1.0, 1.0):
            p = xy + side * lane_width * normal
            if roadmap.is_empty or bool(roadmap.is_drivable(p[0], p[1])):
                break
        offset = side * lane_width

        def lateral(d):
            t = np.clip((d - 8.0) / 12.0, 0.0, 1.0)
            return offset * (1.0 - t * t * (3 - 2 * t))

        r = route.suffix(s, lateral)
        actors.append(_vehicle(next_id, r, 0.0, vehicle_extent,
                               VehicleScript(r, 4.0, trigger=25.0)))
    elif name == "lead-brake":
        s = s_ego + rng.uniform(15.0, 25.0)
        if s > route.length - 20.0:
            logger.info("Route too short for lead-brake")
            return actors
        r = route.suffix(s)
        actors.append(_vehicle(next_id, r, 0.0, vehicle_extent,
                               VehicleScript(r, 6.0,
                                             stop_at=rng.uniform(15.0, 30.0),
                                             trigger=20.0)))
    else:
        stops = [(s, l) for s, l in route.stops(roadmap) if s > s_ego + 20.0]
        if not stops:
            logger.info("No signalized junction on route for "
                        "red-light-runner")
            return actors
        s_stop, light = stops[0]
        crossing = [l for l in roadmap.lights
                    if l.group != light.group and
                    np.linalg.norm(l.position - light.position) < 40.0]
        if not crossing:
            return actors
        other = crossing[rng.integers(len(crossing))]
        lane = roadmap.lanes[other.lane_ids[0]]
        straight = [i for i in lane.successors
                    if roadmap.lanes[i].turn == "straight"]
        path = [lane.path.points]
        if straight:
            conn = roadmap.lanes[straight[0]]
            path += [conn.path.points, roadmap.lanes[
                conn.successors[0]].path.points]
        pts = np.concatenate(path)
        r = Route(pts, np.full(len(pts), FOLLOW_LANE), np.zeros((0, 2)),
                  np.zeros(0))
        start = max(lane.length - 35.0, 0.0)
        actors.append(_vehicle(next_id, r, start, vehicle_extent,
                               VehicleScript(r, 8.0, ignore_lights=True,
                                             trigger=45.0)))
    return actors


def initial_state(cfg, seed, scenarios=(), roadmap=None, route=None):
    """
    Builds an episode's first WorldState and the ego Route.

    Args:
        cfg (RunConfig): configuration.
        seed (int): episode seed; the whole episode derives from it.
        scenarios ([str]): dangerous scenarios to inject.
        roadmap (RoadMap): map to use instead of the configured one.
        route (Route): route to use instead of a sampled one.

    Returns:
        (WorldState, Route)
    """
    w = cfg.world
    rng = np.random.default_rng(seed)
    roadmap = roadmap if roadmap is not None else map_from_config(cfg)
    if route is None:
        route = route_from_config(roadmap, rng, cfg)
    xy, h = route.path.interpolate(0.0)
    ego = ActorState(EGO_ID, VEHICLE, xy[0], xy[1], h, 0.0,
                     *w.vehicle_extent)
    actors = spawn_traffic(roadmap, rng, [ego], w.n_vehicles,
                           w.n_pedestrians, tuple(w.vehicle_extent),
                           tuple(w.pedestrian_extent), w.target_speed,
                           w.pedestrian_speed, w.lane_width)
    for name in scenarios:
        actors = inject_scenario(name, roadmap, route, actors, rng, 0.0,
                                 tuple(w.vehicle_extent),
                                 tuple(w.pedestrian_extent), w.lane_width)
    state = WorldState(0.0, actors, roadmap, w.dt, seed,
                       Dynamics.from_config(cfg))
    return state, route
