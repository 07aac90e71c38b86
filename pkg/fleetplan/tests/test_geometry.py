# coding: utf-8

import unittest

import numpy as np
from shapely.geometry import LineString, Point, Polygon

from fleetplan.geometry import (Polyline, box_corners, pose_to_local,
                                points_in_rectangle, ray_cast,
                                rectangle_segments, rectangles_overlap,
                                to_local, to_world)


class TransformTest(unittest.TestCase):

    def test_local_world(self):
        pose = np.array([3.0, -2.0, 0.7])
        pts = np.random.default_rng(0).normal(size=(20, 2)) * 10
        np.testing.assert_allclose(to_world(to_local(pts, pose), pose), pts,
                                   atol=1e-9)
        np.testing.assert_allclose(to_local([4.0, -2.0], (3.0, -2.0,
                                                          np.pi / 2)),
                                   [0.0, -1.0], atol=1e-12)

    def test_pose_to_local(self):
        p = pose_to_local([1.0, 1.0, np.pi], [0.0, 0.0, -np.pi / 2])
        np.testing.assert_allclose(p[:2], [-1.0, 1.0], atol=1e-12)
        self.assertAlmostEqual(abs(p[2]), np.pi / 2)


class RectangleTest(unittest.TestCase):

    def test_corners(self):
        c = box_corners(0.0, 0.0, 0.0, 2.0, 1.0)
        np.testing.assert_allclose(c, [[2, 1], [-2, 1], [-2, -1], [2, -1]])
        self.assertAlmostEqual(Polygon(c).area, 8.0)
        self.assertEqual(box_corners(np.zeros(5), 0.0, 0.0, 1.0,
                                     1.0).shape, (5, 4, 2))

    def test_overlap_matches_shapely(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            a = box_corners(*rng.uniform(-3, 3, 2), rng.uniform(-np.pi, np.pi),
                            *rng.uniform(0.2, 2.0, 2))
            b = box_corners(*rng.uniform(-3, 3, 2), rng.uniform(-np.pi, np.pi),
                            *rng.uniform(0.2, 2.0, 2))
            self.assertEqual(bool(rectangles_overlap(a, b)),
                             Polygon(a).intersects(Polygon(b)))

    def test_points_in_rectangle(self):
        pts = np.array([[0.5, 0.0], [2.5, 0.0], [0.0, 0.9]])
        mask = points_in_rectangle(pts, 0.0, 0.0, 0.0, 2.0, 1.0)
        self.assertEqual(mask.tolist(), [True, False, True])

    def test_ray_cast(self):
        segs = rectangle_segments(box_corners(10.0, 0.0, 0.0, 1.0, 1.0))
        dirs = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])
        dist, idx = ray_cast([0.0, 0.0], dirs, segs)
        self.assertAlmostEqual(dist[0], 9.0)
        self.assertEqual(idx[1], -1)
        self.assertTrue(np.isinf(dist[2]))
        dist, _ = ray_cast([0.0, 0.0], dirs[:1], segs, max_range=5.0)
        self.assertTrue(np.isinf(dist[0]))


class PolylineTest(unittest.TestCase):

    def setUp(self):
        self.pts = [[0.0, 0.0], [10.0, 0.0], [10.0, 10.0]]
        self.line = Polyline(self.pts)

    def test_length_and_interpolate(self):
        self.assertAlmostEqual(self.line.length,
                               LineString(self.pts).length)
        xy, heading = self.line.interpolate(15.0)
        np.testing.assert_allclose(xy, [10.0, 5.0])
        self.assertAlmostEqual(float(heading), np.pi / 2)
        xy, _ = self.line.interpolate(100.0)
        np.testing.assert_allclose(xy, [10.0, 10.0])

    def test_project(self):
        s, lateral = self.line.project([4.0, 1.0])
        self.assertAlmostEqual(s, LineString(self.pts).project(
            Point(4.0, 1.0)))
        self.assertAlmostEqual(lateral, 1.0)
        s, lateral = self.line.project([11.0, 3.0], s_min=12.0)
        self.assertAlmostEqual(s, 13.0)
        self.assertAlmostEqual(lateral, -1.0)

    def test_rejects(self):
        self.assertRaises(ValueError, Polyline, [[0.0, 0.0]])
        self.assertRaises(ValueError, Polyline, [0.0, 1.0, 2.0])

    def test_resample(self):
        xy = self.line.resample(5.0)
        self.assertEqual(len(xy), 5)
        np.testing.assert_allclose(xy[-1], [10.0, 10.0])


if __name__ == "__main__":
    unittest.main()
