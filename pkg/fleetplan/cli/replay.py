# coding: utf-8

"""
Map-view plots of recorded logs. DrivingLog frames show their semantic
rasters, the recorded actors and their future traces; EpisodeLog ticks show
the road around the ego, the policy's detections, every vehicle's
multi-modal plans shaded by likelihood and the refined ego plan.
"""

import logging
import os

import matplotlib

matplotlib.use("Agg")

import numpy as np  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402
from matplotlib.backends.backend_agg import FigureCanvasAgg  # noqa: E402
from matplotlib.patches import Polygon as PolygonPatch  # noqa: E402

from fleetplan.config import RunConfig  # noqa: E402
from fleetplan.geometry import box_corners, to_local, to_world  # noqa: E402
from fleetplan.perception.detection import OrientedBox  # noqa: E402
from fleetplan.utils import load_npz  # noqa: E402
from fleetplan.world.recorder import DrivingLog  # noqa: E402
from fleetplan.world.roadmap import RoadMap  # noqa: E402

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)

ROAD = (0.82, 0.82, 0.82)
SOLID = (0.15, 0.15, 0.15)
BROKEN = (0.85, 0.7, 0.1)
BOX_COLORS = {"vehicle": "tab:blue", "pedestrian": "tab:red"}
PLAN_COLOR = "tab:purple"
REFINED_COLOR = "tab:green"


def raster_image(sem):
    """
    RGB image (H, W, 3) of road/solid/broken rasters.
    """
    sem = np.asarray(sem)
    img = np.ones(sem.shape[1:] + (3,))
    for channel, color in enumerate((ROAD, SOLID, BROKEN)):
        img[sem[channel] > 0] = color
    return img


def _box(ax, corners, color, fill=False):
    ax.add_patch(PolygonPatch(np.asarray(corners), closed=True, fill=fill,
                              edgecolor=color, facecolor=color,
                              linewidth=1.2))


def draw_frame(ax, record, extent, rasters=None):
    """
    Draws one record in the ego frame.

    Args:
        ax: matplotlib Axes.
        record (dict): a DrivingLog frame or an EpisodeLog tick.
        extent ((x0, x1, y0, y1)): plotted area in m.
        rasters ((3, H, W)): semantic rasters over extent, if any.

    Returns:
        {"boxes": box glyphs drawn, "plans": plan polylines drawn}
    """
    counts = {"boxes": 0, "plans": 0}
    if rasters is not None:
        ax.imshow(raster_image(rasters), origin="lower", extent=extent,
                  interpolation="nearest")
    if "detections" in record:
        boxes = [OrientedBox.from_row(r) for r in
                 np.asarray(record["detections"]).reshape(-1, 8)]
        for b in boxes:
            if b.is_ego:
                continue
            _box(ax, b.corners(), BOX_COLORS[b.cls])
            counts["boxes"] += 1
        frames = [np.zeros(3)] + [b.pose for b in boxes
                                  if b.cls == "vehicle" and not b.is_ego]
    elif "actors" in record:
        rows = np.asarray(record["actors"])
        pose = record.get("ego_pose", rows[0, 2:5])
        for r in rows[1:]:
            xy = to_local(r[2:4], pose)
            corners = box_corners(xy[0], xy[1], r[4] - pose[2], r[6], r[7])
            _box(ax, corners, BOX_COLORS["pedestrian" if int(r[1]) else
                                         "vehicle"])
            counts["boxes"] += 1
        if "futures" in record:
            for fut in np.asarray(record["futures"]):
                fut = fut[~np.isnan(fut).any(-1)]
                if len(fut):
                    local = to_local(fut, pose)
                    ax.plot(local[:, 0], local[:, 1], color=PLAN_COLOR,
                            linewidth=0.8)
                    counts["plans"] += 1
        frames = []
    else:
        frames = []

    if "plans" in record:
        plans = np.asarray(record["plans"])
        lik = np.asarray(record.get("likelihoods",
                                    np.full(plans.shape[:2],
                                            1.0 / plans.shape[1])))
        for i, frame in enumerate(frames[:len(plans)]):
            for c in range(plans.shape[1]):
                xy = to_world(plans[i, c], frame)
                ax.plot(xy[:, 0], xy[:, 1], color=PLAN_COLOR,
                        alpha=float(np.clip(0.15 + 0.85 * lik[i, c], 0, 1)),
                        linewidth=1.0)
                counts["plans"] += 1
    if "refined" in record:
        tau = np.asarray(record["refined"])
        ax.plot(tau[:, 0], tau[:, 1], color=REFINED_COLOR, linewidth=2.0,
                marker="o", markersize=2)
    _box(ax, box_corners(0.0, 0.0, 0.0, 2.25, 1.0), "black", fill=True)
    ax.set_xlim(extent[0], extent[1])
    ax.set_ylim(extent[2], extent[3])
    ax.set_aspect("equal")
    return counts


class LogScene(object):
    """
    Plot extent and road source of a log. DrivingLogs carry rasters per
    frame; EpisodeLogs rebuild them from the stored map spec and the ego
    pose.
    """

    def __init__(self, meta):
        grid = meta.get("grid")
        cfg = meta.get("config")
        if grid is None and cfg is not None:
            if isinstance(cfg, dict):
                cfg = RunConfig.from_dict(cfg)
            grid = {"x_range": cfg.grid.x_range, "y_range": cfg.grid.y_range,
                    "pillar_size": cfg.grid.pillar_size}
        grid = grid or dict(RunConfig().grid)
        self.x_range = tuple(grid["x_range"])
        self.y_range = tuple(grid["y_range"])
        self.cell = float(grid["pillar_size"])
        self.roadmap = None
        if meta.get("map"):
            try:
                self.roadmap = RoadMap.from_spec(meta["map"])
            except ValueError as ex:
                logger.warning("No road layer: {}".format(ex))

    @property
    def extent(self):
        return self.x_range + self.y_range

    def rasters(self, record):
        if "sem_rasters" in record:
            return record["sem_rasters"]
        if self.roadmap is not None and "ego_pose" in record:
            return self.roadmap.ego_rasters(record["ego_pose"], self.x_range,
                                            self.y_range, self.cell)
        return None


def render(record, scene, filename, dpi=80, title=None):
    fig = Figure(figsize=(8, 8 * (scene.y_range[1] - scene.y_range[0]) /
                          (scene.x_range[1] - scene.x_range[0])))
    FigureCanvasAgg(fig)
    ax = fig.add_subplot(111)
    counts = draw_frame(ax, record, scene.extent, scene.rasters(record))
    if title:
        ax.set_title(title)
    fig.savefig(filename, dpi=dpi, metadata={"Software": None})
    return counts


def replay(path, out_dir, every=1, dpi=80):
    """
    Writes frame_XXXXXX.png per rendered record of the log at path. In an
    EpisodeLog only the ticks where the policy planned are rendered.
    Unreadable frames are skipped with a warning.

    Returns:
        list of files written.

    Raises:
        FileNotFoundError: no log at path.
    """
    log = DrivingLog.open(path)
    scene = LogScene(log.meta)
    if not os.path.isdir(out_dir):
        os.makedirs(out_dir)
    written = []
    files = log.frame_files()
    for i, fname in enumerate(files):
        if i % max(int(every), 1):
            continue
        try:
            record = load_npz(fname)
        except Exception as ex:
            logger.warning("Skipping corrupt frame {}: {}".format(fname, ex))
            continue
        if "progress" in record and "plans" not in record:
            continue
        out = os.path.join(out_dir, "frame_{:06d}.png".format(i))
        t = record.get("timestamp", record.get("time"))
        title = "t = {:.1f} s".format(float(t)) if t is not None else None
        render(record, scene, out, dpi, title)
        written.append(out)
    logger.info("Rendered {} of {} frames of {} to {}".format(
        len(written), len(files), path, out_dir))
    return written
