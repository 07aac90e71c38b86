# coding: utf-8

import unittest

import numpy as np
from monty.tempfile import ScratchDir

from fleetplan.config import RunConfig
from fleetplan.harness.episode import (InfractionMonitor, EpisodeLog,
                                       run_episode)
from fleetplan.harness.policies import ExpertPolicy, Policy, ZeroPolicy
from fleetplan.harness.scoring import score_route
from fleetplan.world.roadmap import straight_road
from fleetplan.world.state import (ActorState, EGO_ID, PEDESTRIAN, VEHICLE,
                                   Control, WorldState)


def small_config(**harness):
    w = {"map": "straight", "lanes": 1, "n_vehicles": 0,
         "n_pedestrians": 0, "route_length": [60.0, 80.0],
         "lane_change_prob": 0.0}
    return RunConfig({"world": w, "sensor": {"lidar_rays": 90},
                      "harness": harness})


class FailingPolicy(Policy):

    name = "failing"

    def __init__(self, after=3):
        self.after = after
        self.calls = 0

    def act(self, state, route, progress):
        self.calls += 1
        if self.calls > self.after:
            raise RuntimeError("planner crashed")
        return Control(0.0, 1.0, 0.0), {}


class StubRoute(object):

    def __init__(self, stops=()):
        self._stops = list(stops)

    def stops(self, roadmap):
        return self._stops


class RedLight(object):

    def phase(self, t):
        return "red" if t < 10.0 else "green"


def world(ego_xy, ego_speed, others=(), time=0.0, roadmap=None, yaw=0.0):
    ego = ActorState(EGO_ID, VEHICLE, ego_xy[0], ego_xy[1], yaw, ego_speed)
    return WorldState(time, [ego] + list(others),
                      roadmap or straight_road(200.0, 1))


class RunEpisodeTest(unittest.TestCase):

    def test_expert_on_empty_route(self):
        cfg = small_config()
        log = run_episode(ExpertPolicy(cfg), seed=3, cfg=cfg)
        self.assertEqual(log.status, "completed")
        score = score_route(log)
        self.assertEqual(score.route_completion, 1.0)
        self.assertEqual(score.infraction_score, 1.0)
        self.assertEqual(sum(score.infractions.values()), 0)
        self.assertGreater(score.km, 0.05)

    def test_zero_policy(self):
        cfg = small_config()
        log = run_episode(ZeroPolicy(), seed=0, cfg=cfg)
        self.assertEqual(log.status, "blocked")
        self.assertAlmostEqual(float(log.ticks[-1]["time"]), 60.0,
                               places=6)
        score = score_route(log)
        self.assertAlmostEqual(score.route_completion, 0.0, places=2)
        self.assertEqual(score.infractions["blocked"], 1)
        self.assertEqual(score.infraction_score, 1.0)
        self.assertIn("zero_distance", score.flags)

    def test_time_budget(self):
        cfg = small_config()
        log = run_episode(ZeroPolicy(), seed=0, time_budget=2.0, cfg=cfg)
        self.assertEqual(log.status, "timeout")
        self.assertEqual(len(log), 20)
        self.assertEqual(score_route(log).infractions["blocked"], 0)

    def test_determinism(self):
        cfg = small_config().modify({"_set": {"world.n_vehicles": 1}})
        a = run_episode(ExpertPolicy(cfg), scenarios=["lead-brake"], seed=5,
                        cfg=cfg)
        b = run_episode(ExpertPolicy(cfg), scenarios=["lead-brake"], seed=5,
                        cfg=cfg)
        self.assertEqual(a.meta, b.meta)
        self.assertEqual(len(a), len(b))
        for ra, rb in zip(a.ticks, b.ticks):
            self.assertEqual(sorted(ra), sorted(rb))
            for k in ra:
                np.testing.assert_array_equal(ra[k], rb[k])

    def test_policy_exception(self):
        cfg = small_config()
        log = run_episode(FailingPolicy(3), seed=0, cfg=cfg)
        self.assertEqual(log.status, "policy_error")
        self.assertEqual(len(log), 4)
        self.assertEqual(list(log.ticks[-1]["events"]), ["blocked"])
        score = score_route(log)
        self.assertEqual(score.infractions["blocked"], 1)
        self.assertEqual(score.infraction_score, 1.0)
        self.assertLess(score.route_completion, 0.1)

    def test_meta(self):
        cfg = small_config()
        log = run_episode(ZeroPolicy(), seed=2, time_budget=0.5, cfg=cfg)
        self.assertEqual(log.meta["seed"], 2)
        self.assertEqual(log.meta["policy"], "zero")
        self.assertEqual(log.meta["config_hash"], cfg.hash())
        self.assertEqual(log.meta["penalties"]["vehicle"], 0.6)
        self.assertGreater(log.meta["route_length"], 0.0)

    def test_save_and_rescore(self):
        cfg = small_config()
        log = run_episode(ExpertPolicy(cfg), seed=1, cfg=cfg)
        with ScratchDir("."):
            log.save("episode")
            loaded = EpisodeLog.load("episode")
            self.assertTrue(loaded.complete)
            self.assertEqual(len(loaded), len(log))
            self.assertEqual(loaded.status, "completed")
            self.assertEqual(score_route(loaded).as_dict(),
                             score_route(log).as_dict())
            self.assertEqual(loaded.ticks[0]["events"].dtype.kind, "U")

    def test_unfinished_save(self):
        with ScratchDir("."):
            self.assertRaises(ValueError, EpisodeLog({}).save, "episode")


class InfractionMonitorTest(unittest.TestCase):

    def setUp(self):
        self.road = straight_road(200.0, 1)

    def test_collision_once_per_contact(self):
        other = ActorState(4, VEHICLE, 53.0, -1.75, 0.0, 0.0)
        monitor = InfractionMonitor(self.road, StubRoute())
        prev = world((48.0, -1.75), 2.0, [other])
        events = []
        for k in range(3):
            cur = world((50.0 + 0.2 * k, -1.75), 2.0, [other],
                        time=0.1 * (k + 1))
            events += monitor.update(prev, cur, 0.0, 2.0 + k)[0]
            prev = cur
        self.assertEqual(events, ["vehicle"])

    def test_pedestrian(self):
        ped = ActorState(9, PEDESTRIAN, 52.0, -1.75, 0.0, 0.0, 0.3, 0.3)
        monitor = InfractionMonitor(self.road, StubRoute())
        events, _, _ = monitor.update(world((49.0, -1.75), 2.0, [ped]),
                                      world((50.0, -1.75), 2.0, [ped]),
                                      0.0, 2.0)
        self.assertEqual(events, ["pedestrian"])

    def test_standing_ego_not_at_fault(self):
        other = ActorState(4, VEHICLE, 53.0, -1.75, 0.0, 3.0)
        monitor = InfractionMonitor(self.road, StubRoute())
        events, distance, _ = monitor.update(
            world((50.0, -1.75), 0.0, [other]),
            world((50.0, -1.75), 0.0, [other]), 0.0, 0.0)
        self.assertEqual(events, [])
        self.assertEqual(distance, 0.0)

    def test_layout(self):
        monitor = InfractionMonitor(self.road, StubRoute())
        # the left wall starts 3 m beyond the 3.5 m half width
        events, _, _ = monitor.update(world((50.0, 4.0), 2.0),
                                      world((50.0, 5.8), 2.0,
                                            yaw=np.pi / 2), 0.0, 1.0)
        self.assertIn("layout", events)

    def test_red_light(self):
        monitor = InfractionMonitor(self.road, StubRoute([(20.0,
                                                           RedLight())]))
        events, _, _ = monitor.update(world((19.5, -1.75), 5.0),
                                      world((20.0, -1.75), 5.0), 19.5, 20.0)
        self.assertEqual(events, ["red_light"])
        events, _, _ = monitor.update(world((19.5, -1.75), 5.0, time=12.0),
                                      world((20.0, -1.75), 5.0, time=12.1),
                                      19.5, 20.0)
        self.assertEqual(events, [])

    def test_offroad(self):
        monitor = InfractionMonitor(self.road, StubRoute())
        far = (50.0, 200.0)
        events, distance, offroad = monitor.update(
            world((49.0, 200.0), 2.0), world(far, 2.0), 0.0, 0.0)
        self.assertEqual(events, ["offroad"])
        self.assertAlmostEqual(offroad, 1.0)
        self.assertAlmostEqual(distance, 1.0)
        events, _, offroad = monitor.update(
            world(far, 2.0), world((51.0, 200.0), 2.0), 0.0, 0.0)
        self.assertEqual(events, [])
        self.assertAlmostEqual(offroad, 1.0)

    def test_blocked(self):
        monitor = InfractionMonitor(self.road, StubRoute(), 60.0, 1.0)
        monitor.reset(10.0, 0.0)
        state = world((50.0, -1.75), 0.0)
        self.assertEqual(monitor.update(state, world((50.0, -1.75), 0.0,
                                                     time=59.9),
                                        10.0, 10.5)[0], [])
        self.assertEqual(monitor.update(state, world((50.0, -1.75), 0.0,
                                                     time=60.0),
                                        10.0, 10.9)[0], ["blocked"])
        monitor.reset(10.0, 0.0)
        self.assertEqual(monitor.update(state, world((50.0, -1.75), 0.0,
                                                     time=30.0),
                                        10.0, 11.5)[0], [])
        self.assertEqual(monitor.update(state, world((50.0, -1.75), 0.0,
                                                     time=70.0),
                                        11.5, 11.5)[0], [])


if __name__ == "__main__":
    unittest.main()
