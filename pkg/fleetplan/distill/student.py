# coding: utf-8

"""
Distillation of the sensor-driven student from the frozen privileged
teacher. The teacher reads ground-truth rasters at ground-truth poses; the
student reads its own backbone features at the poses of its own
detections, paired with the teacher's vehicles by Hungarian matching on
centre distance.
"""

import logging

import numpy as np
import torch
import torch.nn.functional as F
from scipy.optimize import linear_sum_assignment

from fleetplan.checkpoint import load_checkpoint, restore, save_checkpoint
from fleetplan.distill.metrics import MetricsLog
from fleetplan.distill.samples import gather_samples, gt_grids
from fleetplan.distill.training import perception_batch_loss, summary
from fleetplan.perception.dataset import FrameDataset, batch_inputs
from fleetplan.perception.detection import decode_detections
from fleetplan.perception.network import PerceptionModel
from fleetplan.perception.pillars import GridSpec
from fleetplan.planner.losses import trajectory_l1
from fleetplan.planner.network import N_WAYPOINTS, MotionModel, PlanSet
from fleetplan.utils import seed_everything

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)


def aux_weight(cfg):
    """
    Weight of the auxiliary perception loss: none in the "none" regime.
    """
    return 0.0 if cfg.train.regime == "none" else float(cfg.train.aux_weight)


def match_vehicles(teacher_xy, student_xy, gate=2.0):
    """
    Hungarian assignment of student to teacher vehicles on centre distance.

    Returns:
        [(teacher index, student index)] of pairs at most gate m apart,
        sorted by teacher index.
    """
    teacher_xy = np.asarray(teacher_xy, dtype=float).reshape(-1, 2)
    student_xy = np.asarray(student_xy, dtype=float).reshape(-1, 2)
    if not len(teacher_xy) or not len(student_xy):
        return []
    cost = np.linalg.norm(teacher_xy[:, None] - student_xy[None], axis=-1)
    rows, cols = linear_sum_assignment(cost)
    return sorted((int(r), int(c)) for r, c in zip(rows, cols)
                  if cost[r, c] <= gate)


def student_poses(frames, maps, samples, spec, threshold=0.3, pool_k=3,
                  gate=2.0):
    """
    Student ROI poses for the teacher's vehicles. The ego keeps its own
    pose; other vehicles take the pose of their matched detection and
    unmatched ones are dropped.

    Returns:
        (kept mask over samples (V,), student poses (K, 3))
    """
    keep = np.zeros(len(samples), dtype=bool)
    poses = np.array(samples.poses, dtype=float, copy=True)
    for b in range(len(frames)):
        idx = np.flatnonzero(samples.batch_index == b)
        ego = idx[samples.is_ego[idx]]
        keep[ego] = True
        others = idx[~samples.is_ego[idx]]
        if not len(others):
            continue
        dets = [d for d in decode_detections(maps, threshold, pool_k, b,
                                             spec)
                if d.cls == "vehicle" and not d.is_ego]
        pairs = match_vehicles(samples.poses[others, :2],
                               [(d.x, d.y) for d in dets], gate)
        for t, s in pairs:
            keep[others[t]] = True
            poses[others[t]] = dets[s].pose
    return keep, poses[keep]


def distillation_terms(student, teacher, student_refined=None,
                       teacher_refined=None):
    """
    L1 to the teacher on all command branches, KL(teacher || student) on
    the command likelihoods and, for the ego, L1 to every refinement
    iterate of the teacher.
    """
    trajectory = trajectory_l1(student.trajectories,
                               teacher.trajectories).mean() \
        if len(student) else student.trajectories.sum() * 0.0
    likelihood = F.kl_div(F.log_softmax(student.logits, dim=-1),
                          F.log_softmax(teacher.logits, dim=-1),
                          log_target=True, reduction="batchmean") \
        if len(student) else student.logits.sum() * 0.0
    terms = {"trajectory": trajectory, "likelihood": likelihood}
    if student_refined is not None and teacher_refined is not None and \
            student_refined.K > 0:
        k = min(student_refined.K, teacher_refined.K)
        per_iter = [trajectory_l1(s, t).mean() for s, t in
                    zip(student_refined.iterates[1:k + 1],
                        teacher_refined.iterates[1:k + 1])]
        terms["refine"] = torch.stack(per_iter).mean() if per_iter else \
            student_refined.coarse.sum() * 0.0
    return terms


def student_objective(terms, aux_terms=None, lambda_cmd=0.1, aux=1.0):
    """
    Total student loss. Perception terms enter only with a positive aux
    weight.

    Returns:
        (total, {term name: value} of every included term)
    """
    included = dict(terms)
    total = terms["trajectory"] + lambda_cmd * terms["likelihood"]
    if "refine" in terms:
        total = total + terms["refine"]
    if aux > 0 and aux_terms:
        for k, v in aux_terms.items():
            included["aux_" + k] = v
            total = total + aux * v
    return total, included


def load_teacher(filename, spec):
    """
    The frozen privileged planner of a checkpoint.

    Raises:
        ValueError: the checkpoint was trained on another grid.
    """
    ckpt = load_checkpoint(filename, spec)
    model = MotionModel.from_config(ckpt["config"], spec,
                                    ckpt.get("in_channels"))
    restore(model, ckpt, "planner").eval()
    for p in model.parameters():
        p.requires_grad_(False)
    return model


def build_perception(cfg, spec, perception_checkpoint=None):
    model = PerceptionModel(spec)
    if cfg.train.regime == "staged":
        if perception_checkpoint is None:
            raise FileNotFoundError("checkpoint not found: the staged regime "
                                    "needs a pre-trained perception")
        restore(model, load_checkpoint(perception_checkpoint, spec),
                "perception")
        logger.info("Student perception from {}".format(
            perception_checkpoint))
    return model


def student_batch(perception, planner, teacher, frames, spec, cfg):
    """
    Student objective of one batch.

    Returns:
        (total, included terms, matched vehicle count)
    """
    t, p = cfg.train, cfg.perception
    weight = aux_weight(cfg)
    if weight > 0:
        _, aux_terms, maps, f = perception_batch_loss(perception, frames,
                                                      spec, cfg)
    else:
        f, maps = perception(batch_inputs(frames, spec))
        aux_terms = None
    samples = gather_samples(frames, spec, t.vehicle_range, N_WAYPOINTS,
                             require_labels=False)
    keep, poses = student_poses(frames, maps.detach(), samples, spec,
                                p.threshold, p.pool_k, t.match_gate)
    samples = samples.subset(keep)
    if not len(samples):
        return None, {}, 0
    ego = torch.as_tensor(samples.is_ego)
    commands = torch.as_tensor(samples.commands, dtype=torch.long)
    goals = samples.tensor("goals")[ego]
    with torch.no_grad():
        zt = teacher.embed(gt_grids(frames, spec), samples.poses,
                           samples.batch_index)
        t_plans = teacher.coarse(zt)
        t_ref = teacher.refine(zt[ego], goals, PlanSet(
            t_plans.trajectories[ego], t_plans.logits[ego]).select(
                commands[ego])) if bool(ego.any()) else None
    zs = planner.embed(f, poses, samples.batch_index)
    s_plans = planner.coarse(zs)
    s_ref = planner.refine(zs[ego], goals, PlanSet(
        s_plans.trajectories[ego], s_plans.logits[ego]).select(
            commands[ego])) if bool(ego.any()) else None
    terms = distillation_terms(s_plans, t_plans, s_ref, t_ref)
    total, included = student_objective(terms, aux_terms, t.lambda_cmd,
                                        weight)
    return total, included, len(samples)


def distill_student(logs, cfg, teacher_checkpoint, checkpoint,
                    perception_checkpoint=None, metrics_file=None,
                    steps=None):
    """
    Trains the student end to end under cfg.train.regime: "staged" starts
    from pre-trained perception, "joint" trains perception from scratch
    with the auxiliary loss, "none" from scratch on the distillation loss
    alone.
    """
    spec = GridSpec.from_config(cfg)
    t = cfg.train
    teacher = load_teacher(teacher_checkpoint, spec)
    rng = seed_everything(cfg.seed)
    perception = build_perception(cfg, spec, perception_checkpoint).train()
    planner = MotionModel.from_config(cfg, spec, spec.channels).train()
    params = list(perception.parameters()) + list(planner.parameters())
    opt = torch.optim.Adam(params, lr=t.distill_lr)
    ds = FrameDataset(logs, spec, cfg.perception.temporal_frames,
                      cfg.perception.theta_max)
    metrics = MetricsLog(metrics_file, "distill", t.log_every)
    steps = t.distill_steps if steps is None else steps
    losses = []
    for step in range(steps):
        frames = ds.sample(rng, t.distill_batch_size, augment=True)
        total, terms, vehicles = student_batch(perception, planner, teacher,
                                               frames, spec, cfg)
        if not vehicles:
            logger.warning("Step {}: no usable vehicle, batch skipped"
                           .format(step))
            continue
        opt.zero_grad()
        total.backward()
        opt.step()
        losses.append(float(total))
        metrics.write(step, total, terms, vehicles=vehicles)
    metrics.close()
    save_checkpoint(checkpoint, {"perception": perception,
                                 "planner": planner}, spec, cfg, N_WAYPOINTS,
                    kind="student", regime=t.regime,
                    in_channels=spec.channels)
    return summary(losses, steps, regime=t.regime)
