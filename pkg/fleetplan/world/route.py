# coding: utf-8

"""
Routes: a driven path through the lane graph, per-segment high-level
commands and noisy GNSS goals placed along it.
"""

import logging

import numpy as np
from monty.json import MSONable
from shapely.geometry import LineString

from fleetplan.config import COMMANDS
from fleetplan.geometry import Polyline

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)

TURN_LEFT, TURN_RIGHT, GO_STRAIGHT, FOLLOW_LANE, CHANGE_LEFT, CHANGE_RIGHT = \
    range(6)
TURN_COMMANDS = {"left": TURN_LEFT, "right": TURN_RIGHT,
                 "straight": GO_STRAIGHT}
LANE_CHANGE_LENGTH = 15.0
RESAMPLE_STEP = 1.0


class Route(MSONable):
    """
    Args:
        points ((P, 2) array): route path in world coordinates.
        labels ((P,) int array): command index of the segment starting at
            each point, in COMMANDS order.
        goals ((G, 2) array): noisy GNSS goals.
        goal_s ((G,) array): arc length of each goal's noise-free anchor.
        lane_ids ([int]): lanes visited, in order.
    """

    def __init__(self, points, labels, goals, goal_s, lane_ids=None):
        self.points = np.asarray(points, dtype=float)
        self.labels = np.asarray(labels, dtype=int)
        self.goals = np.asarray(goals, dtype=float).reshape(-1, 2)
        self.goal_s = np.asarray(goal_s, dtype=float).reshape(-1)
        self.lane_ids = list(lane_ids or [])
        if np.any((self.labels < 0) | (self.labels >= len(COMMANDS))):
            raise ValueError("Route commands must come from the six-command "
                             "set")
        self.path = Polyline(self.points)

    @property
    def length(self):
        return self.path.length

    @property
    def end(self):
        return self.path.points[-1]

    def command_at(self, s):
        """
        Command index at arc length s.
        """
        i = int(np.clip(np.searchsorted(self.path.s, s, side="right") - 1, 0,
                        len(self.labels) - 1))
        return int(self.labels[i])

    def segments(self):
        """
        [(s_start, s_end, command index)] maximal constant-command runs.
        """
        out = []
        start = 0
        for i in range(1, len(self.labels)):
            if self.labels[i] != self.labels[start]:
                out.append((self.path.s[start], self.path.s[i],
                            int(self.labels[start])))
                start = i
        out.append((self.path.s[start], self.length,
                    int(self.labels[start])))
        return out

    def next_goal(self, s):
        """
        The nearest goal ahead of arc length s, or the route end after the
        last goal.
        """
        ahead = np.nonzero(self.goal_s > s)[0]
        if len(ahead) == 0:
            return self.end.copy()
        return self.goals[ahead[0]].copy()

    def progress(self, xy, hint=None, back=5.0, ahead=20.0):
        """
        Arc length of the projection of xy, searched near hint if given.
        """
        if hint is None:
            return self.path.project(xy)[0]
        return self.path.project(xy, hint - back, hint + ahead)[0]

    def stops(self, roadmap):
        """
        Cached stop-line crossings of the route, see stop_crossings.
        """
        if getattr(self, "_stops", None) is None:
            self._stops = stop_crossings(self.points, roadmap.lights)
        return self._stops

    def suffix(self, s, lateral=None):
        """
        The part of the route from arc length s on, as a Route without
        goals. lateral, a callable of the distance from s, shifts the path
        sideways (positive to the left).
        """
        keep = self.path.s > s + 1e-6
        start, h = self.path.interpolate(s)
        pts = np.concatenate([start[None], self.points[keep]])
        labels = np.concatenate([[self.command_at(s)], self.labels[keep]])
        if lateral is not None:
            d = np.concatenate([[0.0], self.path.s[keep] - s])
            heading = np.concatenate([[h], self.path.interpolate(
                self.path.s[keep])[1]])
            normal = np.stack([-np.sin(heading), np.cos(heading)], axis=1)
            pts = pts + normal * np.asarray(lateral(d))[:, None]
        if len(pts) < 2:
            pts = np.stack([start, start + 0.1 * np.array([np.cos(h),
                                                           np.sin(h)])])
            labels = labels[:1].repeat(2)
        return Route(pts, labels, np.zeros((0, 2)), np.zeros(0))

    def as_dict(self):
        return {"@module": self.__class__.__module__,
                "@class": self.__class__.__name__,
                "points": self.points.tolist(),
                "labels": self.labels.tolist(),
                "goals": self.goals.tolist(),
                "goal_s": self.goal_s.tolist(),
                "lane_ids": [int(i) for i in self.lane_ids]}

    @classmethod
    def from_dict(cls, d):
        return cls(d["points"], d["labels"], d["goals"], d["goal_s"],
                   d.get("lane_ids"))


def _smoothstep(t):
    return t * t * (3 - 2 * t)


def _lane_points(lane, s0, s1):
    n = max(int(np.ceil((s1 - s0) / RESAMPLE_STEP)), 1)
    xy, _ = lane.path.interpolate(np.linspace(s0, s1, n + 1))
    return xy


def sample_route(roadmap, rng, spacing=(10.0, 20.0), noise_std=0.2,
                 length=None, length_range=(100.0, 400.0), turn_lead=8.0,
                 lane_change_prob=0.2, start_lane=None):
    """
    Samples a route by a random walk on the lane graph.

    Args:
        roadmap (RoadMap): the map; its lane graph must be connected.
        rng (np.random.Generator): randomness source.
        spacing ((min, max)): goal spacing along the route in m.
        noise_std (float): std of the additive goal noise in m.
        length (float): target length; drawn from length_range if None. The
            route ends earlier at a dead end.
        turn_lead (float): junction commands start this many m before the
            junction.
        lane_change_prob (float): chance of a lane change on a lane with a
            neighbour and at least 40 m left.
        start_lane (int): starting lane id, random if None.

    Returns:
        Route
    """
    if not roadmap.is_connected():
        raise ValueError("Cannot sample a route on a disconnected map")
    if length is None:
        length = rng.uniform(*length_range)
    if start_lane is None:
        starts = sorted(i for i, l in roadmap.lanes.items()
                        if not l.is_connector)
        start_lane = starts[rng.integers(len(starts))]

    pts, labels, lane_ids = [], [], []
    total = 0.0
    cur, s_entry = start_lane, 0.0
    while total < length:
        lane = roadmap.lanes[cur]
        lane_ids.append(cur)
        if lane.is_connector:
            piece = _lane_points(lane, 0.0, lane.length)
            pts.append(piece)
            labels.append(np.full(len(piece), TURN_COMMANDS[lane.turn]))
            total += lane.length
            cur, s_entry = lane.successors[0], 0.0
            continue
        nbrs = [(d, n) for d, n in (("left", lane.left), ("right", lane.right))
                if n is not None]
        remaining = lane.length - s_entry
        if nbrs and remaining > 40.0 and rng.random() < lane_change_prob:
            side, nbr_id = nbrs[rng.integers(len(nbrs))]
            nbr = roadmap.lanes[nbr_id]
            s_a = s_entry + 0.5 * remaining - 0.5 * LANE_CHANGE_LENGTH
            s_b = s_a + LANE_CHANGE_LENGTH
            piece = _lane_points(lane, s_entry, s_a)
            pts.append(piece)
            labels.append(np.full(len(piece), FOLLOW_LANE))
            t = np.linspace(0.0, 1.0, 16)
            sa = s_a + t * LANE_CHANGE_LENGTH
            w = _smoothstep(t)[:, None]
            blend = (1 - w) * lane.path.interpolate(sa)[0] + \
                w * nbr.path.interpolate(sa)[0]
            pts.append(blend)
            labels.append(np.full(len(blend), CHANGE_LEFT if side == "left"
                                  else CHANGE_RIGHT))
            total += s_b - s_entry
            cur, s_entry = nbr_id, s_b
            continue
        piece = _lane_points(lane, s_entry, lane.length)
        pts.append(piece)
        labels.append(np.full(len(piece), FOLLOW_LANE))
        total += remaining
        if not lane.successors:
            break
        cur = lane.successors[rng.integers(len(lane.successors))]
        s_entry = 0.0

    points = np.concatenate(pts)
    labels = np.concatenate(labels).astype(int)
    keep = np.concatenate([[True], np.linalg.norm(np.diff(points, axis=0),
                                                  axis=1) > 1e-6])
    points, labels = points[keep], labels[keep]
    s = Polyline(points).s

    if s[-1] > length:
        cut = np.searchsorted(s, length, side="right")
        end_xy, _ = Polyline(points).interpolate(length)
        points = np.concatenate([points[:cut], end_xy[None]])
        labels = np.concatenate([labels[:cut], labels[cut - 1:cut]])
        s = Polyline(points).s

    is_turn = np.isin(labels, list(TURN_COMMANDS.values()))
    starts = np.nonzero(is_turn & ~np.concatenate([[False], is_turn[:-1]]))[0]
    for i in starts:
        lead = (s >= s[i] - turn_lead) & (s < s[i]) & (labels == FOLLOW_LANE)
        labels[lead] = labels[i]

    route_len = s[-1]
    goal_s = []
    g = 0.0
    while True:
        g += rng.uniform(spacing[0], spacing[1])
        if g > route_len:
            break
        goal_s.append(g)
    goal_s = np.asarray(goal_s)
    path = Polyline(points)
    anchors = path.interpolate(goal_s)[0] if len(goal_s) else \
        np.zeros((0, 2))
    goals = anchors + rng.normal(0.0, noise_std, size=anchors.shape)
    logger.debug("Sampled route of {:.1f} m with {} goals".format(
        route_len, len(goal_s)))
    return Route(points, labels, goals, goal_s, lane_ids)


def route_from_config(roadmap, rng, cfg, **kwargs):
    w = cfg.world
    scale = w.scale
    params = dict(spacing=(w.goal_spacing[0] * scale,
                           w.goal_spacing[1] * scale),
                  noise_std=w.goal_noise * scale,
                  length_range=tuple(w.route_length),
                  turn_lead=w.turn_lead,
                  lane_change_prob=w.lane_change_prob)
    params.update(kwargs)
    return sample_route(roadmap, rng, **params)


def stop_crossings(points, lights):
    """
    [(arc length, TrafficLight)] for every stop line the path crosses,
    sorted by arc length.
    """
    path = Polyline(points)
    line = LineString(path.points)
    out = []
    for light in lights:
        hit = line.intersection(LineString(light.stop_line))
        if hit.is_empty:
            continue
        pts = [hit] if hit.geom_type == "Point" else \
            [g for g in getattr(hit, "geoms", []) if g.geom_type == "Point"]
        for p in pts:
            out.append((path.project((p.x, p.y))[0], light))
    return sorted(out, key=lambda t: t[0])
