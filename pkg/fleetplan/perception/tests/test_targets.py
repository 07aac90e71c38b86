# coding: utf-8

import math
import unittest

import numpy as np
import torch
from torch.autograd import gradcheck

from fleetplan.perception.network import HeadMaps
from fleetplan.perception.pillars import GridSpec
from fleetplan.perception.targets import (collate_targets, focal_loss,
                                          frame_targets, gaussian_radius,
                                          perception_loss, splat_boxes)


def make_frame(spec, actors, ego_pose=(100.0, 50.0, 0.0)):
    h, w = spec.shape
    sem = np.zeros((3, h, w), dtype=np.uint8)
    sem[0, : h // 2] = 1
    sem[2, h // 2 - 1] = 1
    return {"actors": np.asarray(actors, dtype=float),
            "ego_pose": np.asarray(ego_pose, dtype=float),
            "sem_rasters": sem}


def perfect_maps(targets, spec, eps=1e-6):
    t = lambda k: torch.as_tensor(targets[k], dtype=torch.float64)
    heat = t("heatmap").clamp(eps, 1 - eps)
    sem = t("semantic").clamp(eps, 1 - eps)
    return HeadMaps(torch.logit(heat), t("orientation"), t("box"),
                    torch.logit(sem), spec)


class GaussianTest(unittest.TestCase):

    def test_radius(self):
        r = gaussian_radius((9.0, 4.0), 0.1)
        self.assertGreater(r, 2.0)
        self.assertLess(r, 3.0)
        self.assertGreater(gaussian_radius((40.0, 40.0), 0.1),
                           gaussian_radius((4.0, 4.0), 0.1))

    def test_splat(self):
        spec = GridSpec((-8, 8), (-8, 8), 0.5, 2, 8, 4)
        t = splat_boxes([[0, 1.1, -2.1, 0.3, 2.25, 1.0],
                         [1, 30.0, 0.0, 0.0, 0.3, 0.3]], spec)
        r, c, _ = spec.cell_index(np.array([1.1, -2.1]))
        self.assertEqual(t["heatmap"][0, r, c], 1.0)
        self.assertEqual(t["heatmap"][1].sum(), 0.0)
        self.assertEqual(int(t["mask"].sum()), 1)
        np.testing.assert_allclose(t["orientation"][:, r, c],
                                   [math.sin(0.3), math.cos(0.3)], rtol=1e-6)
        np.testing.assert_allclose(t["box"][:, r, c],
                                   [math.log(2.25), 0.0], atol=1e-6)
        # minimum radius 2: the ring at distance 2 is still drawn
        self.assertGreater(t["heatmap"][0, r, c + 2], 0.0)
        self.assertTrue(((t["heatmap"] >= 0) & (t["heatmap"] <= 1)).all())


class FrameTargetsTest(unittest.TestCase):

    def setUp(self):
        self.spec = GridSpec((-8, 8), (-8, 8), 0.5, 2, 8, 4)
        self.actors = [[0, 0, 100.0, 50.0, 0.0, 3.0, 2.25, 1.0],
                       [4, 1, 104.0, 53.0, 0.0, 1.0, 0.3, 0.3]]

    def test_ego_is_a_target(self):
        t = frame_targets(make_frame(self.spec, self.actors), self.spec)
        r, c = self.spec.ego_cell
        self.assertEqual(t["heatmap"][0, r, c], 1.0)
        pr, pc, _ = self.spec.cell_index(np.array([4.0, 3.0]))
        self.assertEqual(t["heatmap"][1, pr, pc], 1.0)
        self.assertEqual(t["semantic"].shape, (3, 32, 32))

    def test_rotated_ego_frame(self):
        frame = make_frame(self.spec, self.actors, (100.0, 50.0, np.pi / 2))
        t = frame_targets(frame, self.spec)
        # the pedestrian at world offset (4, 3) is 3 m ahead, 4 m right
        pr, pc, _ = self.spec.cell_index(np.array([3.0, -4.0]))
        self.assertEqual(t["heatmap"][1, pr, pc], 1.0)
        r, c = self.spec.ego_cell
        np.testing.assert_allclose(t["orientation"][:, r, c], [-1.0, 0.0],
                                   atol=1e-6)

    def test_removing_ego_changes_loss(self):
        frame = make_frame(self.spec, self.actors)
        with_ego = collate_targets([frame_targets(frame, self.spec)])
        without = collate_targets([frame_targets(frame, self.spec,
                                                 include_ego=False)])
        torch.manual_seed(0)
        h, w = self.spec.shape
        maps = HeadMaps(torch.randn(1, 2, h, w), torch.randn(1, 2, h, w),
                        torch.randn(1, 2, h, w), torch.randn(1, 3, h, w),
                        self.spec)
        a, _ = perception_loss(maps, with_ego)
        b, _ = perception_loss(maps, without)
        self.assertNotEqual(float(a), float(b))

    def test_raster_mismatch(self):
        frame = make_frame(GridSpec(), self.actors)
        self.assertRaises(ValueError, frame_targets, frame, self.spec)


class PerceptionLossTest(unittest.TestCase):

    def setUp(self):
        self.spec = GridSpec((-4, 4), (-4, 4), 0.5, 2, 8, 4)
        rows = [[0, 0, 0.0, 0.0, 0.0, 0.0, 2.25, 1.0],
                [3, 0, 2.2, -2.6, 1.0, 0.0, 2.25, 1.0],
                [5, 1, -2.0, 2.0, 0.0, 0.0, 0.3, 0.3]]
        self.frame = make_frame(self.spec, rows, (0.0, 0.0, 0.0))
        self.targets = collate_targets([frame_targets(self.frame, self.spec)],
                                       dtype=torch.float64)

    def test_perfect_prediction(self):
        eps = 1e-6
        targets = frame_targets(self.frame, self.spec)
        t = {k: v[None] for k, v in targets.items()}
        total, terms = perception_loss(perfect_maps(t, self.spec, eps),
                                       self.targets)
        bce_eps = -math.log(1 - eps)
        self.assertLessEqual(float(terms["semantic"]), bce_eps * 1.0001)
        self.assertEqual(float(terms["orientation"]), 0.0)
        self.assertEqual(float(terms["box"]), 0.0)
        flat = HeadMaps(*[torch.zeros(1, k, 16, 16, dtype=torch.float64)
                          for k in (2, 2, 2, 3)], spec=self.spec)
        _, flat_terms = perception_loss(flat, self.targets)
        self.assertLess(float(terms["center"]), float(flat_terms["center"]))
        self.assertAlmostEqual(float(total), sum(float(v) for v in
                                                 terms.values()))

    def test_finite_on_random_inputs(self):
        torch.manual_seed(1)
        for _ in range(5):
            maps = HeadMaps(*[torch.randn(1, k, 16, 16, dtype=torch.float64)
                              * 5 for k in (2, 2, 2, 3)], spec=self.spec)
            total, terms = perception_loss(maps, self.targets)
            self.assertTrue(math.isfinite(float(total)))
            for v in terms.values():
                self.assertTrue(math.isfinite(float(v)))

    def test_gradcheck(self):
        torch.manual_seed(2)
        targets = self.targets

        def loss(center, orientation, box, semantic):
            maps = HeadMaps(center, orientation, box, semantic, self.spec)
            return perception_loss(maps, targets)[0]

        for _ in range(3):
            inputs = tuple(torch.randn(1, k, 16, 16, dtype=torch.float64,
                                       requires_grad=True)
                           for k in (2, 2, 2, 3))
            self.assertTrue(gradcheck(loss, inputs, eps=1e-6, atol=1e-7,
                                      rtol=1e-4))

    def test_focal_gradcheck(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            target = torch.as_tensor(rng.uniform(0.0, 0.9, (1, 2, 8, 8)))
            for k, r, c in rng.integers(8, size=(3, 3)):
                target[0, int(k) % 2, int(r), int(c)] = 1.0
            logits = torch.as_tensor(rng.normal(0.0, 3.0, (1, 2, 8, 8)))\
                .requires_grad_(True)
            self.assertTrue(gradcheck(lambda x: focal_loss(x, target),
                                      (logits,), eps=1e-6, atol=1e-7,
                                      rtol=1e-4))

    def test_grid_mismatch(self):
        maps = HeadMaps(*[torch.zeros(1, k, 8, 8) for k in (2, 2, 2, 3)],
                        spec=self.spec)
        self.assertRaises(ValueError, perception_loss, maps, self.targets)

    def test_focal_penalizes_missed_peak(self):
        target = torch.zeros(1, 1, 5, 5)
        target[0, 0, 2, 2] = 1.0
        hit = torch.full((1, 1, 5, 5), -6.0)
        hit[0, 0, 2, 2] = 6.0
        miss = torch.full((1, 1, 5, 5), -6.0)
        self.assertLess(float(focal_loss(hit, target)),
                        float(focal_loss(miss, target)))


if __name__ == "__main__":
    unittest.main()
