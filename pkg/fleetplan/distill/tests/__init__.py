# coding: utf-8

"""
Small synthetic driving logs: a straight road, the ego and two vehicles
driving along it at 2 m per frame, and a pedestrian by the kerb.
"""

import numpy as np

from fleetplan.config import RunConfig
from fleetplan.perception.pillars import GridSpec
from fleetplan.world.recorder import DrivingLog

GRID = {"x_range": [-8.0, 24.0], "y_range": [-8.0, 8.0], "pillar_size": 0.5,
        "out_stride": 2, "channels": 8, "max_points": 4}


def small_config(**sections):
    params = {"grid": dict(GRID),
              "planner": {"K": 2, "embed_dim": 16, "hidden": 16},
              "perception": {"batch_size": 2},
              "train": {"privileged_batch_size": 4, "distill_batch_size": 2,
                        "brake_batch_size": 8, "log_every": 1}}
    for k, v in sections.items():
        params.setdefault(k, {}).update(v)
    return RunConfig(params)


def actor_rows(t, step=2.0):
    x = step * t
    return np.array([[0, 0, x, 0.0, 0.0, step / 0.5, 2.25, 1.0],
                     [7, 0, x + 6.0, 3.5, 0.0, step / 0.5, 2.25, 1.0],
                     [9, 0, x + 20.0, -3.5, 0.0, step / 0.5, 2.25, 1.0],
                     [20, 1, x + 10.0, 6.5, np.pi / 2, 0.0, 0.3, 0.3]])


def road_rasters(spec):
    h, w = spec.shape
    rows, cols = np.mgrid[0:h, 0:w]
    y = spec.cell_center(rows, cols)[..., 1]
    sem = np.zeros((3, h, w), dtype=np.uint8)
    sem[0] = np.abs(y) <= 5.0
    sem[1] = np.abs(np.abs(y) - 5.0) < spec.pillar_size / 2
    sem[2] = np.abs(y) < spec.pillar_size / 2
    return sem


def box_points(rows, ego_pose, rng, per_actor=40):
    pts, scores = [], []
    for _, cls, x, y, yaw, _, hl, hw in rows:
        u = rng.uniform(-hl, hl, per_actor)
        v = rng.choice([-hw, hw], per_actor)
        c, s = np.cos(yaw), np.sin(yaw)
        px, py = x + c * u - s * v - ego_pose[0], y + s * u + c * v - \
            ego_pose[1]
        pts.append(np.column_stack([px, py, rng.uniform(0.2, 1.4, per_actor),
                                    np.ones(per_actor)]))
        label = 4 if int(cls) else 1
        scores.append(np.tile(np.eye(5)[label], (per_actor, 1)))
    ground = rng.uniform([-6, -5], [22, 5], size=(200, 2))
    pts.append(np.column_stack([ground, np.zeros(200), np.ones(200)]))
    scores.append(np.tile(np.eye(5)[2], (200, 1)))
    return (np.concatenate(pts).astype(np.float32),
            np.concatenate(scores).astype(np.float32))


def synthetic_frame(t, spec, rng, command=3):
    rows = actor_rows(t)
    pose = rows[0, 2:5].copy()
    points, scores = box_points(rows, pose, rng)
    braking = int(t % 4 == 0)
    return {"points": points, "point_scores": scores, "actors": rows,
            "sem_rasters": road_rasters(spec), "ego_cmd": np.int64(command),
            "ego_goal": np.array([20.0, 0.0]),
            "ego_speed": np.float64(4.0),
            "expert_action": np.array([0.0, 0.0 if braking else 0.5,
                                       float(braking)]),
            "brake_label": np.int64(braking),
            "priv_features": np.array([braking, 0.5, 1, 0.3, 0, 1, 0.4],
                                      dtype=np.float32),
            "ego_pose": pose, "ekf_pose": pose,
            "timestamp": np.float64(0.5 * t)}


def synthetic_logs(root, cfg=None, episodes=1, frames=14, seed=0):
    """
    Writes episodes complete DrivingLogs under root and returns them.
    """
    cfg = cfg or small_config()
    spec = GridSpec.from_config(cfg)
    rng = np.random.default_rng(seed)
    logs = []
    for e in range(episodes):
        log = DrivingLog.create("{}/episode_{:04d}".format(root, e),
                                {"seed": e})
        for t in range(frames):
            log.append(synthetic_frame(t, spec, rng))
        log.finalize(cfg.world.horizon)
        logs.append(log)
    return logs
