# coding: utf-8

import math
import unittest

import numpy as np
import torch
from shapely.geometry import Polygon

from fleetplan.config import RunConfig
from fleetplan.control.brake import BrakeClassifier
from fleetplan.control.controller import (VehicleController, brake_override,
                                          hard_stop)
from fleetplan.control.gate import NeighbourPlans, collision_gate
from fleetplan.control.pid import (PID, lateral_control,
                                   longitudinal_control, target_speed)
from fleetplan.geometry import box_corners
from fleetplan.world.state import Control


def straight(n=10, gap=1.0):
    return np.column_stack([gap * np.arange(1, n + 1), np.zeros(n)])


class PIDTest(unittest.TestCase):

    def test_integral_growth(self):
        pid = PID(1.0, 0.5, 0.2)
        outs = [pid.step(0.4, 0.1) for _ in range(3)]
        np.testing.assert_allclose(np.diff(outs), 0.5 * 0.4 * 0.1)
        self.assertAlmostEqual(outs[0], 0.4 + 0.5 * 0.04)

    def test_windup(self):
        pid = PID(0.0, 1.0, 0.0, windup=5.0)
        for _ in range(100):
            out = pid.step(10.0, 0.1)
        self.assertEqual(out, 5.0)
        self.assertEqual(pid.integral, 5.0)

    def test_derivative(self):
        pid = PID(0.0, 0.0, 1.0)
        self.assertEqual(pid.step(1.0, 0.1), 0.0)
        self.assertAlmostEqual(pid.step(1.5, 0.1), 5.0)
        pid.reset()
        self.assertEqual(pid.step(3.0, 0.1), 0.0)

    def test_linearity(self):
        errors = [0.3, -0.1, 0.2, 0.05]
        a, b = PID(1.0, 0.5, 0.2), PID(1.0, 0.5, 0.2)
        for e in errors:
            self.assertAlmostEqual(b.step(2.5 * e, 0.1),
                                   2.5 * a.step(e, 0.1))


class LawTest(unittest.TestCase):

    def test_straight_ahead(self):
        self.assertEqual(lateral_control(straight(), PID(), 0.1), 0.0)

    def test_left_aim(self):
        tau = straight()
        tau[4] = [0.0, 5.0]
        steer = lateral_control(tau, PID(1.0, 0.0, 0.0), 0.1)
        self.assertEqual(steer, 1.0)
        tau[4] = [5.0, 1.0]
        steer = lateral_control(tau, PID(1.0, 0.0, 0.0), 0.1)
        self.assertAlmostEqual(steer, math.atan2(1.0, 5.0))

    def test_degenerate_aim(self):
        tau = straight()
        tau[4] = 0.0
        self.assertEqual(lateral_control(tau, PID(), 0.1), 0.0)
        self.assertRaises(ValueError, lateral_control, tau[:3], PID(), 0.1)

    def test_target_speed(self):
        self.assertAlmostEqual(target_speed(straight(), 0.5), 2.0)
        self.assertRaises(ValueError, target_speed, straight(1), 0.5)

    def test_longitudinal(self):
        self.assertEqual(longitudinal_control(straight(), 2.0, PID(5, .5, 1),
                                              0.1), (0.0, 0.0))
        throttle, brake = longitudinal_control(np.zeros((10, 2)), 5.0,
                                               PID(5, .5, 1), 0.1)
        self.assertEqual(throttle, 0.0)
        self.assertGreater(brake, 0.0)
        throttle, brake = longitudinal_control(straight(), 0.0,
                                               PID(5, .5, 1), 0.1)
        self.assertEqual((throttle, brake), (1.0, 0.0))


class OverrideTest(unittest.TestCase):

    def test_examples(self):
        out = brake_override(Control(0.1, 0.6, 0.2), 0.9)
        self.assertEqual((out.brake, out.throttle), (0.9, 0.0))
        c = Control(0.1, 0.6, 0.0)
        self.assertEqual(brake_override(c, 0.0), c)
        self.assertEqual(brake_override(Control(0, 0, 0.8), 0.3).brake, 0.8)
        self.assertRaises(ValueError, brake_override, c, 1.5)

    def test_monotone(self):
        c = Control(0.0, 0.5, 0.3)
        brakes = [brake_override(c, s).brake for s in np.linspace(0, 1, 21)]
        self.assertTrue(all(b2 >= b1 for b1, b2 in zip(brakes, brakes[1:])))

    def test_hard_stop(self):
        self.assertEqual(hard_stop(Control(0.3, 0.8, 0.0)),
                         Control(0.3, 0.0, 1.0))


def oracle_poses(xy, yaw0, origin):
    poses, prev, last = [], np.asarray(origin, float), yaw0
    for p in xy:
        d = p - prev
        if math.hypot(*d) > 1e-3:
            last = math.atan2(d[1], d[0])
        poses.append((p[0], p[1], last))
        prev = p
    return poses


def oracle(ego_tau, nb, threshold, inflation, ego_extent=(2.25, 1.0)):
    ego = oracle_poses(ego_tau, 0.0, (0.0, 0.0))
    for c in range(len(nb.likelihoods)):
        if nb.likelihoods[c] <= threshold:
            continue
        x, y, yaw = nb.pose
        ca, sa = math.cos(yaw), math.sin(yaw)
        world = [(x + ca * u - sa * v, y + sa * u + ca * v)
                 for u, v in nb.trajectories[c]]
        other = oracle_poses(np.array(world), yaw, (x, y))
        for (ex, ey, eyaw), (ox, oy, oyaw) in zip(ego, other):
            a = Polygon(box_corners(ex, ey, eyaw, ego_extent[0] + inflation,
                                    ego_extent[1] + inflation))
            b = Polygon(box_corners(ox, oy, oyaw, nb.extent[0] + inflation,
                                    nb.extent[1] + inflation))
            if a.intersects(b):
                return True
    return False


class GateTest(unittest.TestCase):

    def test_crossing(self):
        nb = NeighbourPlans([6.0, -6.0, math.pi / 2], (2.25, 1.0),
                            np.repeat(straight()[None], 6, axis=0),
                            [1.0, 0, 0, 0, 0, 0], actor_id=3)
        gate = collision_gate(straight(), [nb])
        self.assertTrue(gate.hard_stop)
        self.assertEqual(gate.culprits[0][:2], (3, 0))
        self.assertFalse(collision_gate(straight(), [nb], threshold=1.0))

    def test_parallel(self):
        nb = NeighbourPlans([0.0, 10.0, 0.0], (2.25, 1.0),
                            np.repeat(straight()[None], 6, axis=0),
                            np.full(6, 1.0 / 6))
        self.assertFalse(collision_gate(straight(), [nb], threshold=0.1))

    def test_missing_pose(self):
        nb = NeighbourPlans(None, (2.25, 1.0), np.zeros((6, 10, 2)),
                            np.full(6, 1.0 / 6))
        self.assertFalse(collision_gate(straight(), [nb], threshold=0.1))

    def test_matches_polygon_oracle(self):
        rng = np.random.default_rng(0)
        hits = 0
        for _ in range(1000):
            heading = np.cumsum(rng.normal(0, 0.2, 10))
            steps = rng.uniform(0.2, 2.0, size=(10, 1)) * \
                np.column_stack([np.cos(heading), np.sin(heading)])
            ego = np.cumsum(steps, axis=0)
            pose = np.concatenate([rng.uniform(-15, 15, 2),
                                   rng.uniform(-math.pi, math.pi, 1)])
            trajs = np.cumsum(rng.uniform(-0.5, 2.0, size=(6, 10, 2)),
                              axis=1)
            lik = rng.dirichlet(np.ones(6))
            nb = NeighbourPlans(pose, (2.25, 1.0), trajs, lik)
            gate = collision_gate(ego, [nb], 0.2, 0.25)
            self.assertEqual(gate.hard_stop, oracle(ego, nb, 0.2, 0.25))
            hits += gate.hard_stop
        self.assertGreater(hits, 0)
        self.assertLess(hits, 1000)


class ControllerTest(unittest.TestCase):

    def test_from_config(self):
        ctl = VehicleController.from_config(RunConfig())
        self.assertEqual(ctl.waypoint_dt, 0.5)
        self.assertEqual((ctl.lateral.kp, ctl.lateral.ki, ctl.lateral.kd),
                         (1.0, 0.5, 0.2))
        self.assertEqual(ctl.longitudinal.kp, 5.0)

    def test_run_step(self):
        ctl = VehicleController()
        control, gate = ctl.run_step(straight(), 2.0)
        self.assertFalse(gate.hard_stop)
        self.assertEqual(control, Control(0.0, 0.0, 0.0))
        control, _ = ctl.run_step(straight(), 2.0, brake_score=0.9)
        self.assertEqual((control.throttle, control.brake), (0.0, 0.9))

    def test_hard_stop_dominates(self):
        ctl = VehicleController()
        tau = straight()
        tau[4, 1] = 0.5
        nb = NeighbourPlans([6.0, -6.0, math.pi / 2], (2.25, 1.0),
                            np.repeat(straight()[None], 6, axis=0),
                            [1.0, 0, 0, 0, 0, 0])
        control, gate = ctl.run_step(tau, 0.0, 0.1, [nb])
        self.assertTrue(gate.hard_stop)
        self.assertEqual((control.throttle, control.brake), (0.0, 1.0))
        self.assertGreater(control.steer, 0.0)


class BrakeClassifierTest(unittest.TestCase):

    def setUp(self):
        rng = np.random.default_rng(0)
        x = rng.uniform(0, 1, size=(100, 7)).astype(np.float32)
        x[:, [0, 2, 4]] = rng.integers(0, 2, size=(100, 3))
        y = ((x[:, 0] > 0) | (x[:, 4] > 0)).astype(np.float32)
        self.x, self.y = torch.as_tensor(x), torch.as_tensor(y)

    def test_untrained(self):
        self.assertRaises(RuntimeError, BrakeClassifier().score,
                          np.zeros(7))

    def test_overfit(self):
        torch.manual_seed(0)
        model = BrakeClassifier()
        opt = torch.optim.Adam(model.parameters(), lr=1e-2)
        for _ in range(1500):
            opt.zero_grad()
            loss = model.loss(self.x, self.y)
            loss.backward()
            opt.step()
        model.steps += 1500
        self.assertLess(float(model.loss(self.x, self.y)), 0.05)
        scores = model.score(self.x.numpy())
        self.assertTrue(((scores >= 0) & (scores <= 1)).all())
        held = self.x[self.y == 0][0].numpy().copy()
        before = model.score(held)
        held[0] = 1.0
        self.assertGreater(model.score(held), before)


if __name__ == "__main__":
    unittest.main()
