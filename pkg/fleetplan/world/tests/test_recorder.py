# coding: utf-8

import filecmp
import os
import unittest

import numpy as np
from monty.tempfile import ScratchDir

from fleetplan.config import RunConfig
from fleetplan.world.handlers import FrameShortfallHandler
from fleetplan.world.jobs import CollectJob
from fleetplan.world.recorder import (FRAME_FIELDS, DrivingLog, collect,
                                      collect_episode, find_logs)
from fleetplan.world.route import FOLLOW_LANE
from fleetplan.world.validators import DrivingLogValidator


def small_config(**world):
    w = {"map": "straight", "lanes": 1, "episode_ticks": 60,
         "n_vehicles": 1, "n_pedestrians": 0, "scenario_rate": 0.0,
         "route_length": [100.0, 150.0], "episodes": 2, "frames": 20}
    w.update(world)
    return RunConfig({"world": w, "sensor": {"lidar_rays": 90}})


def actor_rows(frame, present_other=True, other_y=3.0):
    rows = [[0, 0, float(frame), 0.0, 0.0, 2.0, 2.25, 1.0]]
    if present_other:
        rows.append([5, 0, float(frame), other_y, 0.0, 2.0, 2.25, 1.0])
    return np.array(rows)


class DrivingLogTest(unittest.TestCase):

    def test_horizon_arithmetic(self):
        with ScratchDir("."):
            log = DrivingLog.create("ep", {"seed": 0})
            for f in range(120):
                log.append({"actors": actor_rows(f, False)})
            self.assertEqual(log.finalize(10), 120)
            complete = [not np.isnan(fr["futures"][0]).any() for fr in log]
            self.assertEqual(sum(complete), 110)
            self.assertTrue(DrivingLog.open("ep").complete)

    def test_truncation(self):
        with ScratchDir("."):
            log = DrivingLog.create("ep", {"seed": 0})
            for f in range(12):
                log.append({"actors": actor_rows(f, f < 3)})
            log.finalize(10)
            fut = log.load_frame(0)["futures"]
            self.assertEqual(fut.shape, (2, 10, 2))
            np.testing.assert_allclose(fut[1, :2], [[1, 3], [2, 3]])
            self.assertTrue(np.isnan(fut[1, 2:]).all())
            np.testing.assert_allclose(fut[0, :, 0], np.arange(1, 11))

    def test_record_radius(self):
        with ScratchDir("."):
            log = DrivingLog.create("ep", {"seed": 0})
            for f in range(5):
                log.append({"actors": actor_rows(f, True,
                                                 3.0 if f < 2 else 50.0)})
            log.finalize(3, record_radius=40.0)
            fut = log.load_frame(0)["futures"]
            self.assertFalse(np.isnan(fut[1, 0]).any())
            self.assertTrue(np.isnan(fut[1, 1:]).all())


class CollectTest(unittest.TestCase):

    def test_episode(self):
        cfg = small_config()
        with ScratchDir("."):
            log = collect_episode(cfg, 3, "a")
            self.assertEqual(len(log), 12)
            frames = list(log)
            for fr in frames:
                for k in FRAME_FIELDS:
                    self.assertIn(k, fr)
                self.assertEqual(int(fr["ego_cmd"]), FOLLOW_LANE)
                self.assertEqual(fr["sem_rasters"].shape, (3, 160, 160))
                self.assertEqual(fr["point_scores"].shape,
                                 (len(fr["points"]), 5))
                self.assertEqual(fr["priv_features"].shape, (7,))
            # futures are the later recorded positions
            np.testing.assert_allclose(frames[0]["futures"][0, :3],
                                       [f["actors"][0, 2:4]
                                        for f in frames[1:4]])
            self.assertEqual(log.meta["config_hash"], cfg.hash())

    def test_deterministic_bytes(self):
        cfg = small_config(episode_ticks=30)
        with ScratchDir("."):
            a = collect_episode(cfg, 9, "a")
            b = collect_episode(cfg, 9, "b")
            names = [os.path.basename(f) for f in a.frame_files()]
            self.assertEqual(names,
                             [os.path.basename(f) for f in b.frame_files()])
            match, mismatch, errors = filecmp.cmpfiles("a", "b", names,
                                                       shallow=False)
            self.assertEqual(len(match), len(names))

    def test_incremental(self):
        cfg = small_config(episode_ticks=20)
        with ScratchDir("."):
            s = collect(cfg, "logs")
            self.assertEqual(s["episodes"], 2)
            self.assertEqual(s["frames"], 8)
            first = os.path.getmtime(find_logs("logs")[0].frame_files()[0])
            cfg = cfg.modify({"_inc": {"world.episodes": 1}})
            s = collect(cfg, "logs")
            self.assertEqual(s["episodes"], 3)
            self.assertEqual(
                os.path.getmtime(find_logs("logs")[0].frame_files()[0]),
                first)


class CollectStageTest(unittest.TestCase):

    def test_shortfall_handler(self):
        with ScratchDir("."):
            small_config(episode_ticks=20).to_file("config.yaml")
            job = CollectJob("config.yaml", frames=12)
            job.setup()
            job.run()
            self.assertEqual(job.summary["frames"], 8)
            h = FrameShortfallHandler("config.yaml", "logs", frames=12)
            self.assertTrue(h.check())
            d = h.correct()
            self.assertEqual(d["actions"], [
                {"dict": "config.yaml",
                 "action": {"_inc": {"world.episodes": 1}}}])
            self.assertEqual(RunConfig.from_file("config.yaml").world.episodes,
                             3)
            job.setup()
            job.run()
            self.assertFalse(h.check())
            self.assertFalse(DrivingLogValidator("logs", 12).check())
            self.assertTrue(DrivingLogValidator("logs", 13).check())
            self.assertTrue(DrivingLogValidator("missing").check())

    def test_episodes_for(self):
        cfg = small_config()
        self.assertEqual(CollectJob.episodes_for(cfg, 5000), 417)


if __name__ == "__main__":
    unittest.main()
