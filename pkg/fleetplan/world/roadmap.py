# coding: utf-8

"""
Road maps for the micro-world: lanes with a successor graph, lane boundary
polylines tagged solid or broken, the drivable area, building/wall obstacles,
junctions and their traffic lights. Maps are generated from a small road
graph (nodes and straight road edges) with right-hand traffic.
"""

import logging

import numpy as np
import shapely
from shapely.geometry import LineString, Polygon, box
from shapely.ops import unary_union

from fleetplan.geometry import Polyline

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)

BOUNDARY_TAGS = ("solid", "broken")
CORNER_RADIUS = 5.0
RASTER_RES = 0.25


class Lane(object):
    """
    A directed lane or junction connector.

    Args:
        lane_id (int): unique id.
        centerline ((N, 2) array): ordered centerline points.
        turn (str): None for road lanes, else "left", "right" or
            "straight" for junction connectors.
        edge: (u, v, index) of the directed road a lane belongs to.
    """

    def __init__(self, lane_id, centerline, turn=None, edge=None):
        self.lane_id = lane_id
        self.path = Polyline(centerline)
        self.turn = turn
        self.edge = edge
        self.successors = []
        self.left = None
        self.right = None

    @property
    def is_connector(self):
        return self.turn is not None

    @property
    def length(self):
        return self.path.length

    def __repr__(self):
        return "Lane({}, turn={}, edge={})".format(self.lane_id, self.turn,
                                                   self.edge)


class TrafficLight(object):
    """
    A light controlling one junction approach. Approaches of group 0 (east/
    west roads) and group 1 (north/south roads) alternate:
    green, yellow, all-red.
    """

    def __init__(self, light_id, position, stop_line, lane_ids, group,
                 cycle=(10.0, 3.0, 1.0)):
        self.light_id = light_id
        self.position = np.asarray(position, dtype=float)
        self.stop_line = np.asarray(stop_line, dtype=float)
        self.lane_ids = list(lane_ids)
        self.group = group
        self.cycle = tuple(float(c) for c in cycle)

    def phase(self, t):
        green, yellow, red = self.cycle
        half = green + yellow + red
        u = (t - self.group * half) % (2 * half)
        if u < green:
            return "green"
        if u < green + yellow:
            return "yellow"
        return "red"


class Junction(object):

    def __init__(self, center, half_size, degree):
        self.center = np.asarray(center, dtype=float)
        self.half_size = half_size
        self.degree = degree
        self.polygon = box(center[0] - half_size, center[1] - half_size,
                           center[0] + half_size, center[1] + half_size)


class RoadMap(object):
    """
    Lanes, boundaries, drivable area and obstacles of a world.

    Args:
        lanes ({id: Lane}): lanes and connectors.
        boundaries ([((N, 2) array, tag)]): lane boundary polylines tagged
            "solid" or "broken".
        drivable (shapely geometry): drivable area.
        obstacles ([Polygon]): buildings and walls.
        junctions ([Junction]): junction areas.
        lights ([TrafficLight]): traffic lights.
        spec (dict): generator name and kwargs, used to serialize the map.
    """

    def __init__(self, lanes=None, boundaries=None, drivable=None,
                 obstacles=None, junctions=None, lights=None, spec=None):
        self.lanes = lanes or {}
        self.boundaries = [(np.asarray(p, dtype=float), t)
                           for p, t in (boundaries or [])]
        for _, tag in self.boundaries:
            if tag not in BOUNDARY_TAGS:
                raise ValueError("Unknown boundary tag {}".format(tag))
        self.drivable = drivable if drivable is not None else Polygon()
        self.obstacles = list(obstacles or [])
        self.junctions = list(junctions or [])
        self.lights = list(lights or [])
        self.spec = spec
        self._raster = None
        self._segments = None
        self._lines = None

    @classmethod
    def from_spec(cls, spec):
        """
        Rebuilds a generated map from {"generator": name, "kwargs": {...}}.
        """
        gens = {"straight": straight_road, "four_way": four_way,
                "grid_town": grid_town}
        if spec is None or spec.get("generator") not in gens:
            raise ValueError("Cannot rebuild map from {}".format(spec))
        return gens[spec["generator"]](**spec.get("kwargs", {}))

    @property
    def is_empty(self):
        return self.drivable.is_empty

    def is_drivable(self, x, y):
        if self.is_empty:
            return np.zeros(np.shape(x), dtype=bool)
        return shapely.contains_xy(self.drivable, x, y) | \
            shapely.intersects_xy(self.drivable.boundary, x, y)

    def is_connected(self):
        """
        True iff the lane graph is weakly connected. Lanes of both
        directions of one road count as linked.
        """
        if not self.lanes:
            return False
        adj = {i: set() for i in self.lanes}
        roads = {}
        for i, lane in self.lanes.items():
            for j in lane.successors + [lane.left, lane.right]:
                if j is not None:
                    adj[i].add(j)
                    adj[j].add(i)
            if lane.edge is not None:
                roads.setdefault(frozenset(lane.edge[:2]), []).append(i)
        for ids in roads.values():
            for i in ids:
                adj[i].update(ids)
                adj[i].discard(i)
        seen = set()
        stack = [next(iter(self.lanes))]
        while stack:
            i = stack.pop()
            if i in seen:
                continue
            seen.add(i)
            stack.extend(adj[i] - seen)
        return len(seen) == len(self.lanes)

    def obstacle_segments(self):
        """
        All obstacle edges as (S, 2, 2), for ray casting.
        """
        if self._segments is None:
            segs = []
            for poly in self.obstacles:
                c = np.asarray(poly.exterior.coords)
                segs.append(np.stack([c[:-1], c[1:]], axis=1))
            self._segments = np.concatenate(segs) if segs else \
                np.zeros((0, 2, 2))
        return self._segments

    def world_raster(self):
        """
        Cached (3, H, W) uint8 world-aligned rasters road/solid/broken at
        RASTER_RES, plus the (xmin, ymin) of the raster corner.
        """
        if self._raster is None:
            if self.is_empty:
                self._raster = (np.zeros((3, 1, 1), dtype=np.uint8),
                                (0.0, 0.0))
                return self._raster
            xmin, ymin, xmax, ymax = self.drivable.bounds
            xmin, ymin = xmin - 10.0, ymin - 10.0
            w = int(np.ceil((xmax + 10.0 - xmin) / RASTER_RES))
            h = int(np.ceil((ymax + 10.0 - ymin) / RASTER_RES))
            cx = xmin + (np.arange(w) + 0.5) * RASTER_RES
            cy = ymin + (np.arange(h) + 0.5) * RASTER_RES
            gx, gy = np.meshgrid(cx, cy)
            raster = np.zeros((3, h, w), dtype=np.uint8)
            raster[0] = shapely.contains_xy(self.drivable, gx, gy)
            for pts, tag in self.boundaries:
                ch = 1 if tag == "solid" else 2
                dense = Polyline(pts).resample(RASTER_RES / 3.0)
                col = np.floor((dense[:, 0] - xmin) / RASTER_RES).astype(int)
                row = np.floor((dense[:, 1] - ymin) / RASTER_RES).astype(int)
                for dr, dc in ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)):
                    r, c = row + dr, col + dc
                    ok = (r >= 0) & (r < h) & (c >= 0) & (c < w)
                    raster[ch, r[ok], c[ok]] = 1
            self._raster = (raster, (xmin, ymin))
        return self._raster

    def lookup(self, xy):
        """
        World raster values (3, ...) at world points (..., 2).
        """
        raster, (xmin, ymin) = self.world_raster()
        xy = np.asarray(xy, dtype=float)
        col = np.floor((xy[..., 0] - xmin) / RASTER_RES).astype(int)
        row = np.floor((xy[..., 1] - ymin) / RASTER_RES).astype(int)
        ok = (row >= 0) & (row < raster.shape[1]) & (col >= 0) & \
            (col < raster.shape[2])
        out = np.zeros((3,) + row.shape, dtype=np.uint8)
        out[:, ok] = raster[:, row[ok], col[ok]]
        return out

    def ego_rasters(self, pose, x_range, y_range, cell):
        """
        Road/solid/broken rasters (3, H, W) in the frame of pose, row index
        along y and column index along x. Road is the majority of 2x2
        sub-samples per cell, markings are set if any sub-sample hits one.
        """
        w = int(round((x_range[1] - x_range[0]) / cell))
        h = int(round((y_range[1] - y_range[0]) / cell))
        if self.is_empty:
            return np.zeros((3, h, w), dtype=np.uint8)
        cx = x_range[0] + (np.arange(w) + 0.5) * cell
        cy = y_range[0] + (np.arange(h) + 0.5) * cell
        gx, gy = np.meshgrid(cx, cy)
        c, s = np.cos(pose[2]), np.sin(pose[2])
        acc = np.zeros((3, h, w), dtype=np.int32)
        for ox in (-0.25, 0.25):
            for oy in (-0.25, 0.25):
                lx, ly = gx + ox * cell, gy + oy * cell
                wx = c * lx - s * ly + pose[0]
                wy = s * lx + c * ly + pose[1]
                acc += self.lookup(np.stack([wx, wy], axis=-1))
        out = np.zeros((3, h, w), dtype=np.uint8)
        out[0] = acc[0] >= 2
        out[1] = acc[1] > 0
        out[2] = acc[2] > 0
        return out

    def lights_for_lane(self, lane_id):
        return [l for l in self.lights if lane_id in l.lane_ids]


def _bezier(p0, c, p1, n=12):
    t = np.linspace(0.0, 1.0, n)[:, None]
    return (1 - t) ** 2 * p0 + 2 * (1 - t) * t * c + t ** 2 * p1


def _line_intersection(p, d, q, e):
    den = d[0] * e[1] - d[1] * e[0]
    if abs(den) < 1e-9:
        return 0.5 * (p + q)
    t = ((q[0] - p[0]) * e[1] - (q[1] - p[1]) * e[0]) / den
    return p + t * d


def build_map(nodes, edges, lanes_per_direction=1, lane_width=3.5,
              lights=True, light_cycle=(10.0, 3.0, 1.0), spec=None,
              obstacles=None):
    """
    Builds a RoadMap from a road graph.

    Args:
        nodes ([(x, y)]): road graph nodes.
        edges ([(i, j)]): undirected straight roads between nodes.
        lanes_per_direction (int): lanes in each direction.
        lane_width (float): lane width in m.
        lights (bool): place traffic lights at nodes of degree >= 3.
        light_cycle: (green, yellow, all-red) seconds.
        spec (dict): generator description stored on the map.
        obstacles ([Polygon]): buildings and walls.
    """
    nodes = [np.asarray(n, dtype=float) for n in nodes]
    n_lanes = lanes_per_direction
    half_road = n_lanes * lane_width
    degree = [0] * len(nodes)
    for i, j in edges:
        degree[i] += 1
        degree[j] += 1
    jhalf = half_road + CORNER_RADIUS
    hsize = [jhalf if d >= 2 else 0.0 for d in degree]

    lanes = {}
    by_edge = {}
    boundaries = []
    roads = []
    next_id = [0]

    def new_lane(points, turn=None, edge=None):
        lane = Lane(next_id[0], points, turn=turn, edge=edge)
        lanes[lane.lane_id] = lane
        next_id[0] += 1
        return lane

    for i, j in edges:
        roads.append(LineString([nodes[i], nodes[j]]).buffer(
            half_road, cap_style="flat"))
        for u, v in ((i, j), (j, i)):
            d = nodes[v] - nodes[u]
            d = d / np.linalg.norm(d)
            r = np.array([d[1], -d[0]])
            a = nodes[u] + d * hsize[u]
            b = nodes[v] - d * hsize[v]
            ids = []
            for k in range(n_lanes):
                off = r * (k + 0.5) * lane_width
                ids.append(new_lane(np.stack([a + off, b + off]),
                                    edge=(u, v, k)).lane_id)
            for k, lid in enumerate(ids):
                if k > 0:
                    lanes[lid].left = ids[k - 1]
                if k < n_lanes - 1:
                    lanes[lid].right = ids[k + 1]
            by_edge[(u, v)] = ids
        d = nodes[j] - nodes[i]
        d = d / np.linalg.norm(d)
        r = np.array([d[1], -d[0]])
        a = nodes[i] + d * hsize[i]
        b = nodes[j] - d * hsize[j]
        boundaries.append((np.stack([a, b]), "solid"))
        for k in range(1, n_lanes + 1):
            tag = "solid" if k == n_lanes else "broken"
            for sgn in (1.0, -1.0):
                off = sgn * r * k * lane_width
                boundaries.append((np.stack([a + off, b + off]), tag))

    junctions = []
    traffic_lights = []
    for v, deg in enumerate(degree):
        if deg < 2:
            continue
        junctions.append(Junction(nodes[v], jhalf, deg))
        incoming = [(u, w) for (u, w) in by_edge if w == v]
        outgoing = [(w, x) for (w, x) in by_edge if w == v]
        for (u, _) in incoming:
            din = nodes[v] - nodes[u]
            din = din / np.linalg.norm(din)
            for (_, x) in outgoing:
                if x == u:
                    continue
                dout = nodes[x] - nodes[v]
                dout = dout / np.linalg.norm(dout)
                cross = din[0] * dout[1] - din[1] * dout[0]
                if abs(cross) < 0.1 and np.dot(din, dout) > 0:
                    turn, pairs = "straight", range(n_lanes)
                elif deg == 2:
                    turn = "left" if cross > 0 else "right"
                    pairs = range(n_lanes)
                elif cross > 0:
                    turn, pairs = "left", [0]
                else:
                    turn, pairs = "right", [n_lanes - 1]
                for k in pairs:
                    src = lanes[by_edge[(u, v)][k]]
                    dst = lanes[by_edge[(v, x)][k]]
                    p0 = src.path.points[-1]
                    p1 = dst.path.points[0]
                    c = _line_intersection(p0, din, p1, dout)
                    conn = new_lane(_bezier(p0, c, p1), turn=turn)
                    conn.successors.append(dst.lane_id)
                    src.successors.append(conn.lane_id)
            if lights and deg >= 3:
                r = np.array([din[1], -din[0]])
                end = nodes[v] - din * jhalf
                group = 0 if abs(din[0]) >= abs(din[1]) else 1
                traffic_lights.append(TrafficLight(
                    len(traffic_lights), end + r * half_road,
                    np.stack([end, end + r * half_road]),
                    by_edge[(u, v)], group, light_cycle))

    drivable = unary_union(roads + [j.polygon for j in junctions])
    return RoadMap(lanes=lanes, boundaries=boundaries, drivable=drivable,
                   obstacles=obstacles, junctions=junctions,
                   lights=traffic_lights, spec=spec)


def straight_road(length=200.0, lanes_per_direction=2, lane_width=3.5,
                  walls=True):
    """
    A straight two-way road along +x from x=0 to x=length, optionally lined
    by walls 3 m beyond the outer edges.
    """
    half = lanes_per_direction * lane_width
    obstacles = []
    if walls:
        for sgn in (1.0, -1.0):
            y0 = sgn * (half + 3.0)
            obstacles.append(box(0.0, min(y0, y0 + sgn * 0.5), length,
                                 max(y0, y0 + sgn * 0.5)))
    spec = {"generator": "straight",
            "kwargs": {"length": length,
                       "lanes_per_direction": lanes_per_direction,
                       "lane_width": lane_width, "walls": walls}}
    return build_map([(0.0, 0.0), (length, 0.0)], [(0, 1)],
                     lanes_per_direction, lane_width, lights=False, spec=spec,
                     obstacles=obstacles)


def four_way(arm=60.0, lanes_per_direction=1, lane_width=3.5,
             light_cycle=(10.0, 3.0, 1.0)):
    """
    A single signalized four-way junction at the origin with corner
    buildings.
    """
    h = lanes_per_direction * lane_width + CORNER_RADIUS + 2.0
    obstacles = [box(sx * h if sx > 0 else -arm, sy * h if sy > 0 else -arm,
                     arm if sx > 0 else -h, arm if sy > 0 else -h)
                 for sx in (1, -1) for sy in (1, -1)]
    spec = {"generator": "four_way",
            "kwargs": {"arm": arm, "lanes_per_direction": lanes_per_direction,
                       "lane_width": lane_width,
                       "light_cycle": list(light_cycle)}}
    nodes = [(0.0, 0.0), (arm, 0.0), (0.0, arm), (-arm, 0.0), (0.0, -arm)]
    edges = [(0, 1), (0, 2), (0, 3), (0, 4)]
    return build_map(nodes, edges, lanes_per_direction, lane_width,
                     light_cycle=light_cycle, spec=spec, obstacles=obstacles)


def grid_town(blocks=2, block=100.0, lanes_per_direction=2, lane_width=3.5,
              light_cycle=(10.0, 3.0, 1.0)):
    """
    A (blocks+1) x (blocks+1) grid of two-way roads with one building per
    block.
    """
    m = blocks + 1
    nodes = [(i * block, j * block) for j in range(m) for i in range(m)]
    edges = []
    for j in range(m):
        for i in range(m):
            k = j * m + i
            if i < blocks:
                edges.append((k, k + 1))
            if j < blocks:
                edges.append((k, k + m))
    g = lanes_per_direction * lane_width + CORNER_RADIUS + 2.0
    obstacles = [box(i * block + g, j * block + g,
                     (i + 1) * block - g, (j + 1) * block - g)
                 for j in range(blocks) for i in range(blocks)]
    spec = {"generator": "grid_town",
            "kwargs": {"blocks": blocks, "block": block,
                       "lanes_per_direction": lanes_per_direction,
                       "lane_width": lane_width,
                       "light_cycle": list(light_cycle)}}
    return build_map(nodes, edges, lanes_per_direction, lane_width,
                     light_cycle=light_cycle, spec=spec, obstacles=obstacles)


def map_from_config(cfg):
    """
    The map named by cfg.world.map, sized by cfg.world.map_size.
    """
    w = cfg.world
    cycle = tuple(w.light_cycle)
    if w.map == "straight":
        return straight_road(w.map_size, w.lanes, w.lane_width)
    if w.map == "four_way":
        return four_way(w.map_size / 2.0, w.lanes, w.lane_width, cycle)
    if w.map == "grid_town":
        return grid_town(2, w.map_size / 2.0, w.lanes, w.lane_width, cycle)
    raise ValueError("Unknown map {}".format(w.map))
