# coding: utf-8

import unittest

import numpy as np
import torch
import torch.nn.functional as F

from fleetplan.perception.network import PerceptionModel, scatter_max
from fleetplan.perception.pillars import (GridSpec, SparsePillars, pillarize,
                                          point_paint)


def cloud(rng, n, extent):
    xy = rng.uniform(-extent, extent, size=(n, 2))
    rest = rng.uniform(0, 1, size=(n, 2))
    return point_paint(np.hstack([xy, rest]),
                       np.eye(5)[rng.integers(5, size=n)])


class ScatterMaxTest(unittest.TestCase):

    def test_groups(self):
        x = torch.tensor([[1.0, 5.0], [3.0, 2.0], [0.5, 0.5]])
        out = scatter_max(x, torch.tensor([0, 0, 2]), 3)
        np.testing.assert_allclose(out.numpy(), [[3, 5], [0, 0], [0.5, 0.5]])

    def test_empty(self):
        out = scatter_max(torch.zeros((0, 4)),
                          torch.zeros(0, dtype=torch.long), 2)
        self.assertEqual(tuple(out.shape), (2, 4))


class PerceptionModelTest(unittest.TestCase):

    def setUp(self):
        torch.manual_seed(0)
        self.spec = GridSpec((-4, 4), (-4, 4), 0.5, 2, 8, 8)
        self.model = PerceptionModel(self.spec).eval()
        self.rng = np.random.default_rng(0)

    def test_desk_shapes(self):
        spec = GridSpec()
        model = PerceptionModel(spec).eval()
        pillars = pillarize(cloud(self.rng, 500, 30.0), spec)
        with torch.no_grad():
            f, maps = model(pillars)
        self.assertEqual(tuple(f.shape), (1, 64, 80, 80))
        for m in (maps.center, maps.orientation, maps.box):
            self.assertEqual(tuple(m.shape), (1, 2, 160, 160))
        self.assertEqual(tuple(maps.semantic.shape), (1, 3, 160, 160))
        c = maps.centerness
        self.assertTrue(bool(((c > 0) & (c < 1)).all()))

    def test_empty_pillars(self):
        pillars = pillarize(np.zeros((0, 9)), self.spec)
        with torch.no_grad():
            f, maps = self.model(pillars)
        self.assertEqual(tuple(f.shape), (1, 8, 8, 8))
        self.assertTrue(bool(torch.isfinite(f).all()))
        self.assertTrue(bool(torch.isfinite(maps.center).all()))

    def test_empty_pillars_in_training(self):
        self.model.train()
        f, _ = self.model(pillarize(np.zeros((0, 9)), self.spec))
        self.assertTrue(bool(torch.isfinite(f).all()))

    def test_duplicate_point(self):
        pts = cloud(self.rng, 40, 3.0)
        dup = np.vstack([pts, pts[:1]])
        with torch.no_grad():
            a = self.model.backbone.canvas(pillarize(pts, self.spec))
            b = self.model.backbone.canvas(pillarize(dup, self.spec))
        np.testing.assert_allclose(a.numpy(), b.numpy())

    def test_permutation_invariance(self):
        pts = cloud(self.rng, 60, 3.5)
        perm = self.rng.permutation(len(pts))
        with torch.no_grad():
            a, _ = self.model(pillarize(pts, self.spec))
            b, _ = self.model(pillarize(pts[perm], self.spec))
        np.testing.assert_allclose(a.numpy(), b.numpy(), atol=1e-6)

    def test_sparse_matches_dense_reference(self):
        pts = cloud(self.rng, 80, 3.5)
        pillars = pillarize(pts, self.spec)
        bb = self.model.backbone
        with torch.no_grad():
            canvas = bb.canvas(pillars)[0]
            for m, (_, row, col) in enumerate(pillars.coords):
                x = torch.as_tensor(pillars.features[pillars.inverse == m])
                for layer in bb.pfn:
                    y = F.relu(F.batch_norm(
                        layer.linear(x), layer.norm.running_mean,
                        layer.norm.running_var, layer.norm.weight,
                        layer.norm.bias, False, 0.0, layer.norm.eps))
                    top = y.max(0, keepdim=True)[0]
                    x = top if layer.last_layer else \
                        torch.cat([y, top.expand_as(y)], dim=1)
                np.testing.assert_allclose(canvas[:, row, col].numpy(),
                                           x[0].numpy(), atol=1e-6)
            occupied = pillars.point_counts()[0] > 0
            self.assertEqual(float(canvas[:, ~occupied].abs().sum()), 0.0)

    def test_mismatched_spec(self):
        pillars = pillarize(cloud(self.rng, 10, 3.0), GridSpec())
        self.assertRaises(ValueError, self.model, pillars)

    def test_gradients_reach_point_network(self):
        self.model.train()
        f, maps = self.model(pillarize(cloud(self.rng, 80, 3.5), self.spec))
        (f.sum() + maps.center.sum()).backward()
        grad = self.model.backbone.pfn[0].linear.weight.grad
        self.assertIsNotNone(grad)
        self.assertGreater(float(grad.abs().sum()), 0.0)

    def test_batch(self):
        a = pillarize(cloud(self.rng, 30, 3.0), self.spec)
        b = pillarize(cloud(self.rng, 30, 3.0), self.spec)
        with torch.no_grad():
            fa, _ = self.model(a)
            fab, _ = self.model(SparsePillars.collate([a, b]))
        self.assertEqual(fab.shape[0], 2)
        np.testing.assert_allclose(fab[0].numpy(), fa[0].numpy(), atol=1e-6)

    def test_unsupported_stride(self):
        self.assertRaises(ValueError, PerceptionModel,
                          GridSpec((-4, 4), (-4, 4), 0.5, 4, 8, 8))


if __name__ == "__main__":
    unittest.main()
