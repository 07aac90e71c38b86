# coding: utf-8

import io
import logging
import os
import unittest
from unittest import mock

from monty.serialization import loadfn
from monty.tempfile import ScratchDir

from fleetplan.cli.fleet import (RUN_CONFIG, ablation_variants, example_yaml,
                                 main)
from fleetplan.config import RunConfig
from fleetplan.harness.matrix import REPORT_JSON


def small_config():
    return RunConfig({"world": {"map": "straight", "lanes": 1,
                                "n_vehicles": 0, "n_pedestrians": 0,
                                "route_length": [40.0, 60.0],
                                "lane_change_prob": 0.0},
                      "sensor": {"lidar_rays": 90},
                      "harness": {"scenarios": []}})


def run_cli(argv):
    out, err = io.StringIO(), io.StringIO()
    with mock.patch("sys.stdout", out), mock.patch("sys.stderr", err):
        code = main(argv)
    return code, out.getvalue(), err.getvalue()


class FleetTest(unittest.TestCase):

    def tearDown(self):
        root = logging.getLogger()
        for h in list(root.handlers):
            root.removeHandler(h)
            h.close()

    def test_bad_flag(self):
        with ScratchDir("."):
            with mock.patch("sys.stderr", io.StringIO()):
                with self.assertRaises(SystemExit) as cm:
                    main(["evaluate", "--no-such-flag"])
        self.assertEqual(cm.exception.code, 2)

    def test_example(self):
        code, out, _ = run_cli(["example"])
        self.assertEqual(code, 0)
        self.assertEqual(out.strip(), example_yaml.strip())

    def test_missing_checkpoint(self):
        with ScratchDir("."):
            code, _, err = run_cli(["evaluate", "-w", ".", "--checkpoint",
                                    "missing.pt"])
            self.assertEqual(code, 1)
            self.assertIn("checkpoint not found", err)
            self.assertTrue(os.path.exists("run.log"))

    def test_unknown_override(self):
        with ScratchDir("."):
            code, _, err = run_cli(["evaluate", "-w", ".", "--policy",
                                    "zero", "--set", "planner.nope=1"])
            self.assertEqual(code, 1)
            self.assertIn("Unknown config key", err)

    def test_missing_logs(self):
        with ScratchDir("."):
            code, _, err = run_cli(["train-privileged", "-w", "."])
            self.assertEqual(code, 1)
            self.assertIn("No driving logs", err)

    def test_ablate_refinement(self):
        with ScratchDir("."):
            code, out, _ = run_cli(["ablate", "-w", ".", "--axis",
                                    "refinement", "--set",
                                    "train.distill_steps=3"])
            self.assertEqual(code, 0)
            names = out.split()
            self.assertEqual(names, ["refinement_K0", "refinement_K1",
                                     "refinement_K5"])
            ks = [RunConfig.from_file(os.path.join(
                "ablations", n, "config.yaml")).planner.K for n in names]
            self.assertEqual(ks, [0, 1, 5])
            cfg = RunConfig.from_file(os.path.join(
                "ablations", "refinement_K1", "config.yaml"))
            self.assertEqual(cfg.train.distill_steps, 3)
            plan = loadfn(os.path.join("ablations", "plan.json"))
            self.assertEqual([p["name"] for p in plan], names)
            self.assertEqual(plan[1]["config_hash"], cfg.hash())

    def test_ablation_axes(self):
        self.assertEqual(len(ablation_variants("all")), 9)
        ranges = [o for _, _, o in ablation_variants("range")]
        self.assertEqual(ranges, [["train.vehicle_range=5.0"],
                                  ["train.vehicle_range=15.0"],
                                  ["train.vehicle_range=25.0"]])

    def test_evaluate_expert(self):
        with ScratchDir("."):
            small_config().to_file("config.yaml")
            code, out, _ = run_cli(["evaluate", "-w", "work", "-c",
                                    "config.yaml", "--policy", "expert",
                                    "--routes", "1", "--presets", "clean",
                                    "--seeds", "0", "--set", "seed=3"])
            self.assertEqual(code, 0)
            self.assertTrue(out.startswith("config"))
            cfg = RunConfig.from_file(os.path.join("work", RUN_CONFIG))
            self.assertEqual(cfg.seed, 3)
            self.assertEqual(cfg.world.map, "straight")
            report = loadfn(os.path.join("work", "reports", REPORT_JSON))
            self.assertEqual(report["configs"]["expert"]["episodes"], 1)
            self.assertEqual(report["config_hash"], cfg.hash())
            self.assertTrue(os.path.exists(os.path.join("work",
                                                        "pipeline.json")))

    def test_replay_missing(self):
        with ScratchDir("."):
            code, _, err = run_cli(["replay", "-w", ".", "nowhere"])
            self.assertEqual(code, 1)
            self.assertIn("No driving log", err)


if __name__ == "__main__":
    unittest.main()
