# coding: utf-8

import os
import unittest

import numpy as np
import torch
from monty.tempfile import ScratchDir

from fleetplan.checkpoint import load_checkpoint
from fleetplan.control.brake import BrakeClassifier
from fleetplan.distill.metrics import MetricsLog, read_metrics
from fleetplan.distill.samples import GT_CHANNELS, gather_samples, gt_grids
from fleetplan.distill.tests import small_config, synthetic_logs
from fleetplan.distill.training import (brake_data, motion_terms,
                                        train_brake, train_perception,
                                        train_privileged)
from fleetplan.perception.pillars import GridSpec
from fleetplan.planner.network import MotionModel


class MotionTermsTest(unittest.TestCase):

    def setUp(self):
        torch.manual_seed(0)
        self.cfg = small_config()
        self.spec = GridSpec.from_config(self.cfg)
        with ScratchDir("."):
            self.frames = list(synthetic_logs("logs", frames=14)[0])[:4]
        self.samples = gather_samples(self.frames, self.spec, 25.0)
        self.grids = gt_grids(self.frames, self.spec)
        self.model = MotionModel.from_config(self.cfg, self.spec,
                                             len(GT_CHANNELS))

    def test_terms(self):
        total, terms, labels, plans = motion_terms(self.model, self.grids,
                                                   self.samples)
        self.assertEqual(sorted(terms), ["cmd", "ego", "other", "refine"])
        for v in terms.values():
            self.assertTrue(np.isfinite(float(v)))
        expected = terms["ego"] + 0.5 * terms["other"] + \
            0.1 * terms["cmd"] + terms["refine"]
        self.assertAlmostEqual(float(total), float(expected), places=5)
        ego = torch.as_tensor(self.samples.is_ego)
        self.assertEqual(labels[ego].tolist(), [3] * 4)
        self.assertTrue(bool((labels[~ego] >= 0).all()))
        self.assertEqual(tuple(plans.trajectories.shape), (12, 6, 10, 2))

    def test_gradients(self):
        total, _, _, _ = motion_terms(self.model, self.grids, self.samples)
        total.backward()
        for name in ("embedder", "coarse", "refiner"):
            grads = [p.grad for p in getattr(self.model, name).parameters()]
            self.assertTrue(any(g is not None and g.abs().sum() > 0
                                for g in grads), name)

    def test_overfit_decreases(self):
        opt = torch.optim.SGD(self.model.parameters(), lr=1e-3)
        losses = []
        for _ in range(25):
            total, _, _, _ = motion_terms(self.model, self.grids,
                                          self.samples)
            opt.zero_grad()
            total.backward()
            opt.step()
            losses.append(float(total))
        tol = 1e-3 * losses[0]
        self.assertTrue(all(b <= a + tol for a, b in zip(losses,
                                                         losses[1:])))
        self.assertLess(losses[-1], losses[0])

    def test_overfits_ten_frames(self):
        torch.manual_seed(0)
        with ScratchDir("."):
            # twenty frames give the first ten a full future
            frames = list(synthetic_logs("logs", frames=20)[0])[:10]
        t = self.cfg.train
        samples = gather_samples(frames, self.spec, t.vehicle_range)
        self.assertEqual(int(samples.is_ego.sum()), 10)
        grids = gt_grids(frames, self.spec)
        model = MotionModel.from_config(self.cfg, self.spec,
                                        len(GT_CHANNELS))
        opt = torch.optim.Adam(model.parameters(), lr=t.privileged_lr)
        ego_l1 = float("inf")
        for _ in range(5000):
            total, terms, _, _ = motion_terms(model, grids, samples,
                                              t.lambda_other, t.lambda_cmd)
            ego_l1 = float(terms["ego"])
            if ego_l1 < 0.1:
                break
            opt.zero_grad()
            total.backward()
            opt.step()
        self.assertLess(ego_l1, 0.1)


class StageTest(unittest.TestCase):

    def setUp(self):
        self.cfg = small_config()

    def test_train_perception(self):
        with ScratchDir("."):
            logs = synthetic_logs("logs", self.cfg)
            s = train_perception(logs, self.cfg, "ckpt/perception.pt",
                                 "metrics.jsonl", steps=2)
            self.assertEqual(s["updates"], 2)
            ckpt = load_checkpoint("ckpt/perception.pt",
                                   GridSpec.from_config(self.cfg))
            self.assertEqual(ckpt["kind"], "perception")
            self.assertEqual(ckpt["config_hash"], self.cfg.hash())
            recs = read_metrics("metrics.jsonl")
            self.assertEqual([r["step"] for r in recs], [0, 1])
            self.assertIn("center", recs[0])

    def test_train_privileged(self):
        with ScratchDir("."):
            logs = synthetic_logs("logs", self.cfg)
            s = train_privileged(logs, self.cfg, "privileged.pt",
                                 "metrics.jsonl", steps=3)
            self.assertEqual(s["steps"], 3)
            self.assertEqual(s["updates"] + s["skipped"], 3)
            self.assertEqual(sum(s["pseudo_commands"]), s["other_samples"])
            ckpt = load_checkpoint("privileged.pt")
            self.assertEqual(ckpt["kind"], "privileged")
            self.assertEqual(ckpt["in_channels"], len(GT_CHANNELS))
            self.assertEqual(ckpt["K"], 2)

    def test_privileged_reproducible(self):
        with ScratchDir("."):
            logs = synthetic_logs("logs", self.cfg)
            a = train_privileged(logs, self.cfg, "a.pt", "a.jsonl", steps=3)
            b = train_privileged(logs, self.cfg, "b.pt", "b.jsonl", steps=3)
            self.assertEqual(a, b)
            self.assertEqual([r["loss"] for r in read_metrics("a.jsonl")],
                             [r["loss"] for r in read_metrics("b.jsonl")])

    def test_skipped_batches(self):
        with ScratchDir("."):
            # four frames never fill a ten-waypoint future
            logs = synthetic_logs("logs", self.cfg, frames=4)
            s = train_privileged(logs, self.cfg, "p.pt", steps=2)
            self.assertEqual(s["skipped"], 2)
            self.assertEqual(s["updates"], 0)
            self.assertTrue(os.path.exists("p.pt"))

    def test_train_brake(self):
        with ScratchDir("."):
            logs = synthetic_logs("logs", self.cfg)
            x, y = brake_data(logs)
            self.assertEqual(x.shape, (14, 7))
            self.assertEqual(float(y.sum()), 4.0)
            s = train_brake(logs, self.cfg, "brake.pt", steps=300)
            self.assertLess(s["train_bce"], s["first_loss"])
            ckpt = load_checkpoint("brake.pt")
            model = BrakeClassifier()
            model.load_state_dict(ckpt["state"]["brake"])
            self.assertTrue(model.trained)
            self.assertGreater(model.score(x[0]), model.score(x[1]))

    def test_no_logs(self):
        self.assertRaises(ValueError, brake_data, [])


class MetricsLogTest(unittest.TestCase):

    def test_every(self):
        with ScratchDir("."):
            log = MetricsLog("m/metrics.jsonl", "brake", every=3)
            for step in range(7):
                log.write(step, 1.0 / (step + 1), {"bce": 0.5})
            log.close()
            self.assertEqual([r["step"] for r in read_metrics(
                "m/metrics.jsonl")], [0, 3, 6])
            log = MetricsLog("m/metrics.jsonl", "brake", every=3)
            log.write(0, 1.0)
            log.write(1, float("nan"))
            log.close()
            recs = read_metrics("m/metrics.jsonl")
            self.assertEqual(len(recs), 2)
            self.assertTrue(np.isnan(recs[-1]["loss"]))
            self.assertEqual(recs[0]["stage"], "brake")


if __name__ == "__main__":
    unittest.main()
