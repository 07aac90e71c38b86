# coding: utf-8

"""
Training stages on recorded driving logs: perception pre-training, the
privileged motion planner on ground-truth rasters, and the brake
classifier.
"""

import logging

import numpy as np
import torch

from fleetplan.checkpoint import save_checkpoint
from fleetplan.control.brake import BrakeClassifier
from fleetplan.distill.metrics import MetricsLog
from fleetplan.distill.samples import GT_CHANNELS, gather_samples, gt_grids
from fleetplan.perception.dataset import FrameDataset, batch_inputs
from fleetplan.perception.network import PerceptionModel
from fleetplan.perception.pillars import GridSpec
from fleetplan.perception.targets import collate_targets, frame_targets
from fleetplan.perception.targets import perception_loss
from fleetplan.planner.losses import (loss_cmd, loss_ego, loss_other,
                                      loss_refine, motion_loss)
from fleetplan.planner.network import N_WAYPOINTS, MotionModel, PlanSet
from fleetplan.utils import seed_everything

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)


def perception_batch_loss(model, frames, spec, cfg):
    """
    Perception loss of a batch of frames; returns (total, terms, maps, f).
    """
    p = cfg.perception
    f, maps = model(batch_inputs(frames, spec))
    targets = collate_targets([frame_targets(fr, spec, p.min_overlap,
                                             p.min_radius) for fr in frames],
                              device=f.device)
    total, terms = perception_loss(maps, targets)
    return total, terms, maps, f


def train_perception(logs, cfg, checkpoint, metrics_file=None, steps=None):
    """
    Pre-trains the perception backbone and heads with rotation
    augmentation.

    Returns:
        summary dict with the step count and first and last losses.
    """
    spec = GridSpec.from_config(cfg)
    p = cfg.perception
    rng = seed_everything(cfg.seed)
    ds = FrameDataset(logs, spec, p.temporal_frames, p.theta_max)
    model = PerceptionModel(spec).train()
    opt = torch.optim.Adam(model.parameters(), lr=p.lr)
    metrics = MetricsLog(metrics_file, "perception", cfg.train.log_every)
    steps = p.steps if steps is None else steps
    losses = []
    for step in range(steps):
        frames = ds.sample(rng, p.batch_size, augment=True)
        total, terms, _, _ = perception_batch_loss(model, frames, spec, cfg)
        opt.zero_grad()
        total.backward()
        opt.step()
        losses.append(float(total))
        metrics.write(step, total, terms)
    metrics.close()
    save_checkpoint(checkpoint, {"perception": model}, spec, cfg,
                    N_WAYPOINTS, kind="perception")
    return summary(losses, steps)


def summary(losses, steps, **extra):
    d = {"steps": int(steps), "updates": len(losses),
         "first_loss": losses[0] if losses else None,
         "last_loss": losses[-1] if losses else None}
    d.update(extra)
    return d


def motion_terms(model, grids, samples, lambda_other=0.5, lambda_cmd=0.1):
    """
    Privileged motion objective of a batch: the ego loss on the recorded
    command, the best-command loss on every other vehicle, the command
    classifier on the ego command and the other vehicles' pseudo-commands,
    and the refinement loss of the ego.

    Returns:
        (total, terms, pseudo-commands (V,), PlanSet)
    """
    device = grids.device
    z = model.embed(grids, samples.poses, samples.batch_index)
    plans = model.coarse(z)
    y = samples.tensor("labels", grids.dtype, device)
    ego = torch.as_tensor(samples.is_ego, device=device)
    commands = torch.as_tensor(samples.commands, dtype=torch.long,
                               device=device)
    l_ego = loss_ego(plans.trajectories[ego], y[ego], commands[ego])
    l_other, argmin = loss_other(plans.trajectories[~ego], y[~ego])
    labels = commands.clone()
    labels[~ego] = argmin
    l_cmd = loss_cmd(plans.logits, labels)
    l_refine = None
    if bool(ego.any()) and model.K > 0:
        goal = samples.tensor("goals", grids.dtype, device)[ego]
        ego_plans = PlanSet(plans.trajectories[ego], plans.logits[ego])
        refined = model.refine(z[ego], goal, ego_plans.select(commands[ego]))
        l_refine = loss_refine(refined, y[ego])
    total = motion_loss(l_ego, l_other, l_cmd, l_refine, lambda_other,
                        lambda_cmd)
    terms = {"ego": l_ego, "other": l_other, "cmd": l_cmd,
             "refine": l_refine if l_refine is not None else 0.0}
    return total, terms, labels, plans


def train_privileged(logs, cfg, checkpoint, metrics_file=None, steps=None):
    """
    Trains the privileged planner on ground-truth rasters with the traces
    of the ego and every vehicle within train.vehicle_range. Batches
    without a usable vehicle are skipped.

    Returns:
        summary dict, including the count of other-vehicle samples and the
        histogram of their pseudo-commands.
    """
    spec = GridSpec.from_config(cfg)
    t = cfg.train
    rng = seed_everything(cfg.seed)
    ds = FrameDataset(logs, spec)
    model = MotionModel.from_config(cfg, spec, len(GT_CHANNELS)).train()
    opt = torch.optim.Adam(model.parameters(), lr=t.privileged_lr)
    metrics = MetricsLog(metrics_file, "privileged", t.log_every)
    steps = t.privileged_steps if steps is None else steps
    losses, skipped, n_other = [], 0, 0
    pseudo = np.zeros(len(cfg.commands), dtype=int)
    for step in range(steps):
        frames = ds.sample(rng, t.privileged_batch_size)
        samples = gather_samples(frames, spec, t.vehicle_range, N_WAYPOINTS)
        if not len(samples):
            logger.warning("Step {}: no usable vehicle, batch skipped"
                           .format(step))
            skipped += 1
            continue
        grids = gt_grids(frames, spec)
        total, terms, labels, _ = motion_terms(model, grids, samples,
                                               t.lambda_other, t.lambda_cmd)
        opt.zero_grad()
        total.backward()
        opt.step()
        other = labels[~torch.as_tensor(samples.is_ego)].numpy()
        pseudo += np.bincount(other[other >= 0], minlength=len(pseudo))
        n_other += samples.n_other
        losses.append(float(total))
        metrics.write(step, total, terms, vehicles=len(samples))
    metrics.close()
    save_checkpoint(checkpoint, {"planner": model}, spec, cfg, N_WAYPOINTS,
                    kind="privileged", in_channels=len(GT_CHANNELS))
    return summary(losses, steps, skipped=skipped, other_samples=n_other,
                   pseudo_commands=pseudo.tolist())


def brake_data(logs):
    """
    (features (N, 7), labels (N,)) of every recorded frame.
    """
    feats, labels = [], []
    for log in logs:
        for fr in log:
            feats.append(np.asarray(fr["priv_features"], dtype=np.float32))
            labels.append(float(fr["brake_label"]))
    if not feats:
        raise ValueError("No frames to train the brake classifier on")
    return np.stack(feats), np.asarray(labels, dtype=np.float32)


def train_brake(logs, cfg, checkpoint, metrics_file=None, steps=None):
    """
    Fits the brake classifier with BCE against the recorded expert brake
    labels.
    """
    t = cfg.train
    spec = GridSpec.from_config(cfg)
    rng = seed_everything(cfg.seed)
    x, y = brake_data(logs)
    x, y = torch.as_tensor(x), torch.as_tensor(y)
    logger.info("Brake classifier on {} frames, {:.1%} braking".format(
        len(y), float(y.mean())))
    model = BrakeClassifier(x.shape[1])
    opt = torch.optim.Adam(model.parameters(), lr=t.brake_lr)
    metrics = MetricsLog(metrics_file, "brake", t.log_every)
    steps = t.brake_steps if steps is None else steps
    losses = []
    for step in range(steps):
        idx = torch.as_tensor(rng.integers(len(y), size=min(
            t.brake_batch_size, len(y))))
        loss = model.loss(x[idx], y[idx])
        opt.zero_grad()
        loss.backward()
        opt.step()
        losses.append(float(loss))
        metrics.write(step, loss)
    metrics.close()
    model.steps += steps
    with torch.no_grad():
        full = float(model.loss(x, y))
    save_checkpoint(checkpoint, {"brake": model}, spec, cfg, N_WAYPOINTS,
                    kind="brake")
    return summary(losses, steps, train_bce=full)
