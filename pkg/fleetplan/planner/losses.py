# coding: utf-8

"""
Motion losses. The L1 of a trajectory is the per-waypoint L1 norm
|dx| + |dy| averaged over its n waypoints, so a plan off by (1, 0)
everywhere scores 1. Samples whose label holds NaN (a truncated future) are
skipped.
"""

import logging

import torch
import torch.nn.functional as F

from fleetplan.planner.network import check_command

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)


def trajectory_l1(pred, target):
    """
    Per-trajectory L1 over trailing (n, 2) waypoints: |dx| + |dy| summed
    per waypoint, then averaged over the n waypoints. This is twice the
    mean over all n * 2 coordinates.
    """
    return (pred - target).abs().sum(dim=-1).mean(dim=-1)


def valid_labels(y):
    return torch.isfinite(y).flatten(start_dim=1).all(dim=1)


def _mean_or_zero(values, like):
    if values.numel() == 0:
        return like.sum() * 0.0
    return values.mean()


def loss_ego(plans, y, command):
    """
    L1 between the commanded branch and the ground-truth future.

    Args:
        plans ((N, 6, n, 2)): per-command trajectories.
        y ((N, n, 2)): future waypoints in each vehicle's frame.
        command ((N,)): ground-truth commands.
    """
    command = check_command(command).to(plans.device).reshape(-1)
    ok = valid_labels(y)
    idx = torch.arange(len(plans), device=plans.device)
    pred = plans[idx, command]
    return _mean_or_zero(trajectory_l1(pred[ok], y[ok]), plans)


def loss_other(plans, y):
    """
    L1 of the best fitting command branch.

    Returns:
        (loss, argmin): argmin (N,) is the pseudo-command of each sample,
        -1 where the label is truncated. Ties go to the lowest index.
    """
    ok = valid_labels(y)
    per_branch = trajectory_l1(plans[ok], y[ok][:, None])
    argmin = torch.full((len(plans),), -1, dtype=torch.long,
                        device=plans.device)
    if per_branch.numel() == 0:
        return plans.sum() * 0.0, argmin
    best, arg = per_branch.min(dim=1)
    argmin[ok] = arg
    return best.mean(), argmin


def loss_refine(refined, y):
    """
    Mean over the K iterations of the per-iteration L1; zero for K = 0.
    """
    if refined.K == 0:
        return refined.coarse.sum() * 0.0
    ok = valid_labels(y)
    terms = [_mean_or_zero(trajectory_l1(tau[ok], y[ok]), tau)
             for tau in refined.iterates[1:]]
    return torch.stack(terms).mean()


def loss_cmd(logits, labels):
    """
    Cross-entropy of the command likelihood head; labels of -1 are skipped.
    """
    labels = torch.as_tensor(labels, dtype=torch.long, device=logits.device)
    ok = labels >= 0
    if not bool(ok.any()):
        return logits.sum() * 0.0
    return F.cross_entropy(logits[ok], labels[ok])


def motion_loss(l_ego, l_other, l_cmd, l_refine=None, lambda_other=0.5,
                lambda_cmd=0.1):
    total = l_ego + lambda_other * l_other + lambda_cmd * l_cmd
    if l_refine is not None:
        total = total + l_refine
    return total
