# coding: utf-8

"""
Drivers for closed-loop episodes. A policy sees the world state, the route
and the ego progress and returns a Control plus a dict of internals that
the episode log keeps (detections, plans, gate decision, brake score).
"""

import logging

import numpy as np
import torch

from fleetplan.checkpoint import load_checkpoint, restore
from fleetplan.config import RunConfig
from fleetplan.control.brake import BrakeClassifier
from fleetplan.control.controller import VehicleController
from fleetplan.control.gate import NeighbourPlans
from fleetplan.geometry import pose_to_local, to_local, to_world, wrap
from fleetplan.perception.dataset import batch_inputs
from fleetplan.perception.detection import decode_detections
from fleetplan.perception.frames import stack_scans
from fleetplan.perception.network import PerceptionModel
from fleetplan.planner.network import MotionModel, PlanSet
from fleetplan.world.ekf import PoseBelief, ekf_step
from fleetplan.world.expert import drive, expert_step
from fleetplan.world.sensors import lidar_scan, semantic_oracle
from fleetplan.world.state import Control

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)


class Policy(object):
    """
    Base class of episode drivers. Policies carry per-episode state; reset
    is called before the first act of every episode.
    """

    name = "policy"

    def reset(self, state, route):
        pass

    def act(self, state, route, progress):
        """
        Returns:
            (Control, {internal name: array})
        """
        raise NotImplementedError


class ZeroPolicy(Policy):
    """
    Never moves.
    """

    name = "zero"

    def act(self, state, route, progress):
        return Control(0.0, 0.0, 0.0), {}


class ExpertPolicy(Policy):
    """
    The scripted autopilot with privileged access to the world.
    """

    name = "expert"

    def __init__(self, cfg=None):
        self.cfg = cfg or RunConfig()

    def act(self, state, route, progress):
        w = self.cfg.world
        control, label, _ = expert_step(state, route, progress,
                                        w.target_speed, w.expert_ttc)
        return control, {"brake_score": np.float64(label)}


class LearnedPolicy(Policy):
    """
    The sensor-driven stack: perception on painted lidar, motion plans for
    the ego and every detected vehicle, refinement toward the next route
    goal, and the controller with brake override and collision gate.

    Plans are made every world.ticks_per_frame ticks, the rate the networks
    were trained at, and kept in world coordinates in between. The ego pose
    used for goals and for re-expressing plans is the EKF belief.

    Args:
        perception (PerceptionModel): trained perception.
        planner (MotionModel): trained student planner.
        cfg (RunConfig): run configuration (sensors, controller, world).
        brake (BrakeClassifier): optional brake classifier.
    """

    name = "learned"

    def __init__(self, perception, planner, cfg, brake=None):
        self.perception = perception.eval()
        self.planner = planner.eval()
        self.spec = planner.spec
        self.cfg = cfg
        # fed privileged scene features, see _brake_score
        self.brake = brake.eval() if brake is not None else None
        self.controller = None
        self.belief = None
        self.history = []
        self.tick = 0
        self.route = None
        self.stops = []
        self.tau_world = None
        self.neighbours = []

    @classmethod
    def from_checkpoints(cls, student, brake=None, cfg=None):
        """
        Raises:
            FileNotFoundError: a checkpoint is missing.
            ValueError: a checkpoint of the wrong kind or grid.
        """
        ckpt = load_checkpoint(student)
        if ckpt.get("kind") != "student":
            raise ValueError("{} is a {} checkpoint, not a student".format(
                student, ckpt.get("kind")))
        spec = ckpt["grid"]
        perception = restore(PerceptionModel(spec), ckpt, "perception")
        planner = restore(MotionModel.from_config(
            ckpt["config"], spec, ckpt.get("in_channels", spec.channels)),
            ckpt, "planner")
        classifier = None
        if brake is not None:
            bk = load_checkpoint(brake)
            classifier = restore(BrakeClassifier(), bk, "brake")
        logger.info("Learned policy from {} (K={}, regime {})".format(
            student, planner.K, ckpt.get("regime")))
        return cls(perception, planner, cfg or ckpt["config"], classifier)

    def reset(self, state, route):
        ego = state.ego
        self.controller = VehicleController.from_config(self.cfg)
        self.belief = PoseBelief.initial(ego.x, ego.y, ego.yaw, ego.speed)
        self.history = []
        self.tick = 0
        self.route = route
        self.stops = route.stops(state.roadmap)
        self.tau_world = None
        self.neighbours = []

    def _update_belief(self, state):
        w = self.cfg.world
        ego = state.ego
        rng = state.tick_rng(3)
        gnss = ego.xy + rng.normal(0.0, w.ekf_gnss_noise, 2)
        yaw = ego.yaw + rng.normal(0.0, w.ekf_yaw_noise)
        speed = ego.speed + rng.normal(0.0, w.ekf_speed_noise)
        self.belief = ekf_step(self.belief, gnss, yaw, w.dt,
                               w.ekf_process_noise, w.ekf_gnss_noise,
                               w.ekf_yaw_noise, speed, w.ekf_speed_noise)

    def _scan(self, state):
        s = self.cfg.sensor
        rng = state.tick_rng(1)
        points = lidar_scan(state, s.lidar_rays, s.lidar_rings,
                            s.lidar_range, s.ground_ranges,
                            s.ground_azimuth_step, s.lidar_dropout,
                            s.intensity, rng)
        scores = semantic_oracle(points, state, s.semantic_noise, rng)
        frame = {"points": points, "point_scores": scores,
                 "ego_pose": state.ego.pose, "ekf_pose": self.belief.pose}
        t = max(int(self.cfg.perception.temporal_frames), 1)
        self.history = (self.history + [frame])[-t:]
        if len(self.history) > 1:
            points, scores = stack_scans(self.history)
        return {"points": points, "point_scores": scores}

    def _plan(self, state, route, progress):
        p = self.cfg.perception
        pose = self.belief.pose
        frame = self._scan(state)
        with torch.no_grad():
            f, maps = self.perception(batch_inputs([frame], self.spec))
            dets = decode_detections(maps, p.threshold, p.pool_k, 0,
                                     self.spec)
            others = [d for d in dets if d.cls == "vehicle" and not d.is_ego]
            poses = np.array([[0.0, 0.0, 0.0]] + [d.pose for d in others])
            z = self.planner.embed(f, poses)
            plans = self.planner.coarse(z)
            command = torch.as_tensor([route.command_at(progress)],
                                      dtype=torch.long)
            goal = torch.as_tensor(
                to_local(route.next_goal(progress), pose)[None],
                dtype=z.dtype)
            refined = self.planner.refine(z[:1], goal, PlanSet(
                plans.trajectories[:1], plans.logits[:1]).select(command))
        tau = refined.trajectory[0].numpy()
        trajectories = plans.trajectories.numpy()
        likelihoods = plans.likelihoods.numpy()
        self.tau_world = to_world(tau, pose)
        self.neighbours = []
        for i, d in enumerate(others, start=1):
            xy = to_world(np.array(d.pose[:2]), pose)
            self.neighbours.append((np.array([xy[0], xy[1],
                                              wrap(d.yaw + pose[2])]),
                                    (d.hl, d.hw), trajectories[i],
                                    likelihoods[i]))
        return {"detections": np.array([d.as_row() for d in dets]).reshape(
                    -1, 8),
                "plans": trajectories, "likelihoods": likelihoods,
                "refined": tau}

    def _neighbours(self, pose):
        out = []
        for i, (world_pose, extent, trajs, lik) in enumerate(self.neighbours):
            out.append(NeighbourPlans(pose_to_local(world_pose, pose),
                                      extent, trajs, lik, actor_id=i))
        return out

    def _brake_score(self, state, progress):
        """
        Brake probability from the privileged scene features of the
        scripted autopilot; the one input of this policy not derived from
        its own sensors.
        """
        if self.brake is None or not self.brake.trained:
            return None
        w = self.cfg.world
        ego = state.ego
        _, _, info = drive(state, ego, self.route.path, progress,
                           self.stops, w.target_speed, w.expert_ttc)
        return self.brake.score(info.features(ego.speed))

    def act(self, state, route, progress):
        if self.tick > 0:
            self._update_belief(state)
        internals = {}
        if self.tick % int(self.cfg.world.ticks_per_frame) == 0 or \
                self.tau_world is None:
            internals = self._plan(state, route, progress)
        self.tick += 1
        pose = self.belief.pose
        tau = to_local(self.tau_world, pose)
        brake_score = self._brake_score(state, progress)
        control, gate = self.controller.run_step(
            tau, state.ego.speed, brake_score, self._neighbours(pose))
        internals["gate"] = np.array([float(gate.hard_stop),
                                      float(len(gate.culprits))])
        if brake_score is not None:
            internals["brake_score"] = np.float64(brake_score)
        return control, internals
