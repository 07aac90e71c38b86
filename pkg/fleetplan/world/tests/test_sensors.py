# coding: utf-8

import unittest

import numpy as np
from shapely.geometry import box

from fleetplan.geometry import to_world
from fleetplan.world.roadmap import RoadMap, straight_road
from fleetplan.world.sensors import (LANE_MARKINGS, ROADS, VEHICLES,
                                     lidar_scan, semantic_oracle)
from fleetplan.world.state import ActorState, EGO_ID, VEHICLE, WorldState


def world(others=(), roadmap=None, ego_pose=(0.0, 0.0, 0.0)):
    ego = ActorState(EGO_ID, VEHICLE, *ego_pose)
    return WorldState(0.0, [ego] + list(others), roadmap or RoadMap())


class LidarTest(unittest.TestCase):

    def test_wall(self):
        state = world(roadmap=RoadMap(obstacles=[box(10.0, -5.0, 10.5, 5.0)]))
        pts = lidar_scan(state)
        self.assertGreater(len(pts), 0)
        self.assertEqual(len(pts) % 4, 0)
        np.testing.assert_allclose(pts[:, 0], 10.0, atol=1e-4)
        self.assertTrue(np.all(np.abs(pts[:, 1]) <= 5.0 + 1e-6))
        self.assertEqual(pts.dtype, np.float32)

    def test_empty(self):
        self.assertEqual(lidar_scan(world()).shape, (0, 4))

    def test_density_falls_with_range(self):
        near = lidar_scan(world([ActorState(1, VEHICLE, 5.0, 0.0, 0.0)]))
        far = lidar_scan(world([ActorState(1, VEHICLE, 25.0, 0.0, 0.0)]))
        self.assertGreater(len(near), len(far))
        self.assertGreater(len(far), 0)

    def test_points_on_geometry(self):
        car = ActorState(1, VEHICLE, 12.0, 3.0, 0.4)
        state = world([car], ego_pose=(1.0, 2.0, 0.3))
        pts = lidar_scan(state)
        xy = to_world(pts[:, :2].astype(float), state.ego.pose)
        c, s = np.cos(car.yaw), np.sin(car.yaw)
        d = xy - car.xy
        lx, ly = np.abs(c * d[:, 0] + s * d[:, 1]), \
            np.abs(-s * d[:, 0] + c * d[:, 1])
        on_edge = np.isclose(lx, car.hl, atol=1e-4) | \
            np.isclose(ly, car.hw, atol=1e-4)
        self.assertTrue(np.all(on_edge))
        self.assertTrue(np.all((lx <= car.hl + 1e-4) & (ly <= car.hw + 1e-4)))

    def test_ground_returns(self):
        rm = straight_road(200.0, lanes_per_direction=1)
        state = world(roadmap=rm, ego_pose=(100.0, -1.75, 0.0))
        pts = lidar_scan(state)
        ground = pts[pts[:, 2] == 0]
        self.assertGreater(len(ground), 0)
        self.assertTrue(np.all(np.linalg.norm(ground[:, :2], axis=1) <= 30.0
                               + 1e-4))

    def test_dropout_deterministic(self):
        rm = RoadMap(obstacles=[box(10.0, -5.0, 10.5, 5.0)])
        full = lidar_scan(world(roadmap=rm))
        a = lidar_scan(world(roadmap=rm), dropout=0.5)
        b = lidar_scan(world(roadmap=rm), dropout=0.5)
        self.assertLess(len(a), len(full))
        np.testing.assert_array_equal(a, b)


class SemanticOracleTest(unittest.TestCase):

    def test_vehicle_points(self):
        state = world([ActorState(1, VEHICLE, 8.0, 1.0, 0.2)])
        pts = lidar_scan(state)
        scores = semantic_oracle(pts, state, 0.0)
        self.assertEqual(scores.shape, (len(pts), 5))
        np.testing.assert_allclose(scores[:, VEHICLES], 1.0)

    def test_road_and_marking(self):
        rm = straight_road(200.0, lanes_per_direction=1)
        state = world(roadmap=rm, ego_pose=(100.0, -1.75, 0.0))
        pts = np.array([[5.0, 0.0, 0.0, 1.0], [5.0, 1.75, 0.0, 1.0]])
        labels = semantic_oracle(pts, state, 0.0).argmax(1)
        self.assertEqual(labels.tolist(), [ROADS, LANE_MARKINGS])

    def test_noise_rate(self):
        rm = straight_road(200.0, lanes_per_direction=1)
        state = world(roadmap=rm, ego_pose=(100.0, -1.75, 0.0))
        pts = np.tile([[5.0, 0.0, 0.0, 1.0]], (100000, 1))
        scores = semantic_oracle(pts, state, 0.2, np.random.default_rng(0))
        wrong = np.mean(scores.argmax(1) != ROADS)
        self.assertAlmostEqual(wrong, 0.2, delta=0.01)
        np.testing.assert_allclose(scores.sum(1), 1.0, atol=1e-5)

    def test_bad_rate(self):
        self.assertRaises(ValueError, semantic_oracle, np.zeros((0, 4)),
                          world(), 1.0)
        self.assertEqual(semantic_oracle(np.zeros((0, 4)), world()).shape,
                         (0, 5))


if __name__ == "__main__":
    unittest.main()
