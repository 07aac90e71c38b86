# coding: utf-8

"""
Motion networks: the ROI embedder shared by both planners, the per-command
coarse planner with its command likelihood head, and the recurrent
refiner that turns a coarse plan into a goal-directed one.
"""

import logging

import torch
import torch.nn as nn
import torch.nn.functional as F

from fleetplan.config import COMMANDS
from fleetplan.planner.roi import RoiTemplate, roi_warp

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)

N_WAYPOINTS = 10


def cumulative_decode(offsets):
    """
    Waypoints from per-step offsets along dim -2.
    """
    return torch.cumsum(offsets, dim=-2)


def check_command(command):
    command = torch.as_tensor(command, dtype=torch.long)
    if command.numel() and (int(command.min()) < 0 or
                            int(command.max()) >= len(COMMANDS)):
        raise ValueError("Unknown command {}".format(command.tolist()))
    return command


class RoiEmbedder(nn.Module):
    """
    CNN over a ROI crop followed by global average pooling.
    """

    def __init__(self, in_channels=64, embed_dim=128, width=128):
        super(RoiEmbedder, self).__init__()
        self.in_channels = in_channels
        self.embed_dim = embed_dim
        self.conv = nn.Sequential(
            nn.Conv2d(in_channels, width, 3, padding=1),
            nn.ReLU(inplace=True),
            nn.Conv2d(width, embed_dim, 3, stride=2, padding=1),
            nn.ReLU(inplace=True))

    def forward(self, roi):
        return self.conv(roi).mean(dim=(2, 3))


class PlanSet(object):
    """
    Per-command trajectories (N, 6, n, 2) in each vehicle's frame and the
    command logits (N, 6).
    """

    def __init__(self, trajectories, logits):
        self.trajectories = trajectories
        self.logits = logits

    @property
    def likelihoods(self):
        return F.softmax(self.logits, dim=-1)

    def select(self, command):
        command = check_command(command).to(self.trajectories.device)
        idx = torch.arange(len(self.trajectories),
                           device=self.trajectories.device)
        return self.trajectories[idx, command]

    def __len__(self):
        return len(self.trajectories)


class CoarsePlanner(nn.Module):
    """
    One GRU per command, rolled out n times from a hidden state initialised
    from z. Each step takes the previous waypoint and emits the offset to
    the next one.
    """

    def __init__(self, embed_dim=128, hidden=128, n=N_WAYPOINTS,
                 n_commands=len(COMMANDS)):
        super(CoarsePlanner, self).__init__()
        self.n = n
        self.n_commands = n_commands
        self.init = nn.ModuleList([nn.Linear(embed_dim, hidden)
                                   for _ in range(n_commands)])
        self.cells = nn.ModuleList([nn.GRUCell(2, hidden)
                                    for _ in range(n_commands)])
        self.heads = nn.ModuleList([nn.Linear(hidden, 2)
                                    for _ in range(n_commands)])
        self.likelihood = nn.Linear(embed_dim, n_commands)

    def decode(self, z, command):
        """
        Trajectory (N, n, 2) of a single command branch.
        """
        command = int(check_command(command))
        h = torch.tanh(self.init[command](z))
        wp = z.new_zeros((len(z), 2))
        offsets = []
        for _ in range(self.n):
            h = self.cells[command](wp, h)
            off = self.heads[command](h)
            offsets.append(off)
            wp = wp + off
        return cumulative_decode(torch.stack(offsets, dim=1))

    def forward(self, z):
        trajectories = torch.stack([self.decode(z, c)
                                    for c in range(self.n_commands)], dim=1)
        return PlanSet(trajectories, self.likelihood(z))


class RefinedPlan(object):
    """
    Args:
        coarse ((N, n, 2)): the detached starting plan.
        residuals ([(N, n, 2)]): one residual per iteration.
    """

    def __init__(self, coarse, residuals):
        self.coarse = coarse
        self.residuals = residuals
        iterates = [coarse]
        for r in residuals:
            iterates.append(iterates[-1] + r)
        self.iterates = iterates

    @property
    def trajectory(self):
        return self.iterates[-1]

    @property
    def K(self):
        return len(self.residuals)


class Refiner(nn.Module):
    """
    A single GRU shared by all iterations. Each iteration walks the
    previous plan waypoint by waypoint together with the goal and emits a
    residual per waypoint.
    """

    def __init__(self, embed_dim=128, hidden=128, zero_init=False):
        super(Refiner, self).__init__()
        self.init = nn.Linear(embed_dim, hidden)
        self.cell = nn.GRUCell(4, hidden)
        self.head = nn.Linear(hidden, 2)
        if zero_init:
            nn.init.zeros_(self.head.weight)
            nn.init.zeros_(self.head.bias)

    def step(self, z, goal, tau):
        h = torch.tanh(self.init(z))
        out = []
        for k in range(tau.shape[1]):
            h = self.cell(torch.cat([tau[:, k], goal], dim=-1), h)
            out.append(self.head(h))
        return torch.stack(out, dim=1)

    def forward(self, z, goal, coarse, K):
        if K < 0:
            raise ValueError("K must be nonnegative")
        tau = coarse.detach()
        residuals = []
        for _ in range(K):
            delta = self.step(z, goal, tau)
            residuals.append(delta)
            tau = tau + delta
        return RefinedPlan(coarse.detach(), residuals)


class MotionModel(nn.Module):
    """
    Embedder, coarse planner and refiner over ROIs of one map-view grid.

    Args:
        spec (GridSpec): grid the model reads ROIs from.
        in_channels (int): channels of that grid.
    """

    def __init__(self, spec, in_channels, embed_dim=128, hidden=128,
                 n=N_WAYPOINTS, K=5, template=None, zero_init_refiner=False):
        super(MotionModel, self).__init__()
        self.spec = spec
        self.in_channels = in_channels
        self.n = n
        self.K = K
        self.template = template or RoiTemplate()
        self.embedder = RoiEmbedder(in_channels, embed_dim)
        self.coarse = CoarsePlanner(embed_dim, hidden, n)
        self.refiner = Refiner(embed_dim, hidden, zero_init_refiner)

    @classmethod
    def from_config(cls, cfg, spec, in_channels):
        p = cfg.planner
        return cls(spec, in_channels, p.embed_dim, p.hidden, N_WAYPOINTS,
                   p.K, RoiTemplate.from_config(cfg), p.zero_init_refiner)

    def embed(self, f, poses, batch_index=None):
        return self.embedder(roi_warp(f, poses, self.spec, self.template,
                                      batch_index))

    def refine(self, z, goal, coarse, K=None):
        return self.refiner(z, goal, coarse, self.K if K is None else K)

    def plan(self, f, poses, batch_index=None, command=None, goal=None,
             K=None):
        """
        Plans for every pose.

        Returns:
            (PlanSet, RefinedPlan or None). The refined plan needs both a
            command and a goal in each vehicle's frame; without a goal the
            coarse plan is used raw.
        """
        z = self.embed(f, poses, batch_index)
        plans = self.coarse(z)
        refined = None
        if command is not None and goal is not None:
            goal = torch.as_tensor(goal, dtype=z.dtype,
                                   device=z.device).reshape(-1, 2)
            refined = self.refine(z, goal, plans.select(command), K)
        return plans, refined
