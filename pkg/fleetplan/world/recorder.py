# coding: utf-8

"""
DrivingLog: one directory per episode with a meta.json and one npz record
per frame. Future waypoints are filled retroactively when an episode is
finalized.
"""

import logging
import os
from glob import glob

import numpy as np
from monty.json import MontyDecoder, MontyEncoder
from monty.serialization import dumpfn, loadfn

from fleetplan.geometry import to_local
from fleetplan.utils import load_npz, save_npz
from fleetplan.world.ekf import PoseBelief, ekf_step
from fleetplan.world.expert import expert_step
from fleetplan.world.sensors import lidar_scan, semantic_oracle
from fleetplan.world.state import EGO_ID, OffRoadError, step_world
from fleetplan.world.traffic import SCENARIOS, initial_state

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)

FRAME_FIELDS = ("points", "point_scores", "actors", "futures", "sem_rasters",
                "ego_cmd", "ego_goal", "ego_speed", "expert_action",
                "brake_label", "priv_features")
EXTRA_FIELDS = ("ego_pose", "ekf_pose", "timestamp")
META_FILE = "meta.json"


class EpisodeError(RuntimeError):
    """
    Raised when an episode cannot be recorded.
    """
    pass


class DrivingLog(object):
    """
    An episode directory. Frames are buffered by append and written by
    finalize, which also fills the future trajectories.
    """

    def __init__(self, path, meta=None):
        self.path = path
        self.meta = meta if meta is not None else {}
        self._buffer = []

    @classmethod
    def create(cls, path, meta):
        if not os.path.exists(path):
            os.makedirs(path)
        for f in glob(os.path.join(path, "frame_*.npz")):
            os.remove(f)
        log = cls(path, dict(meta, complete=False, flags=[]))
        log.write_meta()
        return log

    @classmethod
    def open(cls, path):
        fname = os.path.join(path, META_FILE)
        if not os.path.exists(fname):
            raise FileNotFoundError("No driving log at {}".format(path))
        return cls(path, loadfn(fname, cls=MontyDecoder))

    def write_meta(self):
        try:
            dumpfn(self.meta, os.path.join(self.path, META_FILE),
                   cls=MontyEncoder, indent=2, sort_keys=True)
        except (IOError, OSError) as ex:
            raise EpisodeError("Cannot write log meta: {}".format(ex))

    @property
    def complete(self):
        return bool(self.meta.get("complete", False))

    def flag(self, name):
        self.meta.setdefault("flags", []).append(name)

    def frame_files(self):
        return sorted(glob(os.path.join(self.path, "frame_*.npz")))

    def __len__(self):
        return len(self.frame_files())

    def load_frame(self, i):
        return load_npz(self.frame_files()[i])

    def __iter__(self):
        for f in self.frame_files():
            yield load_npz(f)

    def append(self, record):
        self._buffer.append(record)

    def finalize(self, horizon, record_radius=np.inf):
        """
        Fills futures and writes every buffered frame.

        The k-th future waypoint of an actor in frame f is its position in
        frame f + k. From the first later frame where the actor is missing
        or beyond record_radius of the ego its label is NaN (truncated).

        Returns:
            number of frames written.
        """
        frames = self._buffer
        n = len(frames)
        index = []
        for fr in frames:
            rows = fr["actors"]
            ego = rows[0, 2:4]
            visible = np.linalg.norm(rows[:, 2:4] - ego, axis=1) <= \
                record_radius
            index.append({int(r[0]): r[2:4] for r, v in zip(rows, visible)
                          if v})
        for f, fr in enumerate(frames):
            ids = fr["actors"][:, 0].astype(int)
            fut = np.full((len(ids), horizon, 2), np.nan)
            for a, aid in enumerate(ids):
                for k in range(horizon):
                    g = f + k + 1
                    if g >= n or aid not in index[g]:
                        break
                    fut[a, k] = index[g][aid]
            fr["futures"] = fut
        self._buffer = []
        return self.write(frames)

    def write(self, frames):
        """
        Writes frames as frame_000000.npz, ... and marks the log complete.

        Returns:
            number of frames written.
        """
        for f, fr in enumerate(frames):
            try:
                save_npz(os.path.join(self.path, "frame_{:06d}.npz".format(f)),
                         fr)
            except (IOError, OSError) as ex:
                raise EpisodeError("Cannot write frame {}: {}".format(f, ex))
        self.meta["complete"] = True
        self.meta["frames"] = len(frames)
        self.write_meta()
        return len(frames)


def find_logs(root):
    """
    Complete episode directories under root, sorted.
    """
    out = []
    for meta in sorted(glob(os.path.join(root, "*", META_FILE))):
        log = DrivingLog.open(os.path.dirname(meta))
        if log.complete:
            out.append(log)
    return out


def record_frame(state, route, progress, control, brake_label, info, log,
                 grid, sensor, belief=None):
    """
    Snapshots one frame into log.

    Args:
        state (WorldState): current world.
        route (Route): ego route.
        progress (float): ego arc length on the route.
        control (Control): expert action.
        brake_label (int): expert brake bit.
        info (DriveInfo): expert perception of the scene.
        log (DrivingLog): target log.
        grid: section with x_range, y_range and pillar_size.
        sensor: section with the lidar and oracle settings.
        belief (PoseBelief): EKF belief, stored as ekf_pose.

    Returns:
        the record dict (futures are added on finalize).
    """
    ego = state.ego
    rng = state.tick_rng(1)
    points = lidar_scan(state, sensor.lidar_rays, sensor.lidar_rings,
                        sensor.lidar_range, sensor.ground_ranges,
                        sensor.ground_azimuth_step, sensor.lidar_dropout,
                        sensor.intensity, rng)
    scores = semantic_oracle(points, state, sensor.semantic_noise, rng)
    record = {
        "points": points,
        "point_scores": scores,
        "actors": state.snapshot(),
        "sem_rasters": state.roadmap.ego_rasters(
            ego.pose, grid.x_range, grid.y_range, grid.pillar_size),
        "ego_cmd": np.int64(route.command_at(progress)),
        "ego_goal": to_local(route.next_goal(progress), ego.pose),
        "ego_speed": np.float64(ego.speed),
        "expert_action": control.as_array(),
        "brake_label": np.int64(brake_label),
        "priv_features": info.features(ego.speed),
        "ego_pose": ego.pose,
        "ekf_pose": belief.pose if belief is not None else ego.pose,
        "timestamp": np.float64(state.time),
    }
    log.append(record)
    return record


def episode_seed(seed, episode):
    return int(seed) * 100003 + int(episode)


def episode_scenarios(cfg, episode):
    """
    The dangerous scenarios of a collection episode: one with probability
    world.scenario_rate, drawn from SCENARIOS.
    """
    rng = np.random.default_rng([int(cfg.seed), int(episode), 7])
    if rng.random() < cfg.world.scenario_rate:
        return [SCENARIOS[rng.integers(len(SCENARIOS))]]
    return []


def collect_episode(cfg, seed, path, scenarios=(), roadmap=None, route=None):
    """
    Drives the expert through one episode and records a frame every
    world.ticks_per_frame ticks.

    The EKF belief is updated every tick from GNSS, IMU yaw and speed
    readings drawn around the true ego state. An off-road expert flags the
    episode and stops it; the frames recorded so far are kept.

    Returns:
        DrivingLog
    """
    w, grid = cfg.world, cfg.grid
    state, route = initial_state(cfg, seed, scenarios, roadmap, route)
    meta = {"seed": int(seed), "map": state.roadmap.spec,
            "route": route.as_dict(), "dt": w.dt,
            "ticks_per_frame": w.ticks_per_frame, "scale": w.scale,
            "horizon": w.horizon, "scenarios": list(scenarios),
            "config": cfg.as_dict(), "config_hash": cfg.hash(),
            "grid": {"x_range": list(grid.x_range),
                     "y_range": list(grid.y_range),
                     "pillar_size": grid.pillar_size}}
    log = DrivingLog.create(path, meta)
    ego = state.ego
    belief = PoseBelief.initial(ego.x, ego.y, ego.yaw, ego.speed)
    progress = 0.0
    for tick in range(int(w.episode_ticks)):
        try:
            control, label, info = expert_step(state, route, progress,
                                               w.target_speed, w.expert_ttc)
        except OffRoadError as ex:
            logger.warning("Episode {} flagged: {}".format(seed, ex))
            log.flag("offroad")
            break
        progress = route.progress(state.ego.xy, progress)
        if tick % w.ticks_per_frame == 0:
            record_frame(state, route, progress, control, label, info, log,
                         grid, cfg.sensor, belief)
        if progress >= route.length - 1.0:
            break
        state = step_world(state, {EGO_ID: control}, w.dt)
        ego = state.ego
        rng = state.tick_rng(3)
        gnss = ego.xy + rng.normal(0.0, w.ekf_gnss_noise, 2)
        yaw = ego.yaw + rng.normal(0.0, w.ekf_yaw_noise)
        speed = ego.speed + rng.normal(0.0, w.ekf_speed_noise)
        belief = ekf_step(belief, gnss, yaw, w.dt, w.ekf_process_noise,
                          w.ekf_gnss_noise, w.ekf_yaw_noise, speed,
                          w.ekf_speed_noise)
    n = log.finalize(w.horizon, w.record_radius)
    logger.info("Episode {} recorded {} frames to {}".format(seed, n, path))
    return log


def collect(cfg, root, frames=None):
    """
    Collects cfg.world.episodes episodes under root, stopping early once
    frames frames exist. Complete episodes already on disk are kept and
    counted, so an interrupted or extended collection resumes.

    Returns:
        dict with the episode and frame counts and the flagged episodes.
    """
    if not os.path.exists(root):
        os.makedirs(root)
    total, flagged, episodes = 0, [], 0
    for e in range(int(cfg.world.episodes)):
        if frames is not None and total >= frames:
            break
        path = os.path.join(root, "episode_{:04d}".format(e))
        seed = episode_seed(cfg.seed, e)
        log = None
        if os.path.exists(os.path.join(path, META_FILE)):
            log = DrivingLog.open(path)
            if not log.complete or log.meta.get("seed") != seed:
                log = None
        if log is None:
            log = collect_episode(cfg, seed, path, episode_scenarios(cfg, e))
        else:
            logger.info("Keeping complete episode {}".format(path))
        total += len(log)
        episodes += 1
        if log.meta.get("flags"):
            flagged.append(os.path.basename(path))
    logger.info("Collected {} frames in {} episodes".format(total, episodes))
    return {"episodes": episodes, "frames": total, "flagged": flagged}
