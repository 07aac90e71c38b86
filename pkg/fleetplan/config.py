# coding: utf-8

"""
This module defines RunConfig, the single source of every tunable constant
of the stack. A config is read from a YAML/JSON file with one nested section
per component, or from a flat file of ``section.key=value`` lines, and then
overridden from the command line. Unknown sections or keys are rejected so a
typo never silently falls back to a default.
"""

import copy
import io
import json
import logging
import math
import os

from monty.collections import AttrDict
from monty.json import MSONable
from monty.serialization import dumpfn, loadfn
from ruamel.yaml import YAML

from fleetplan.ansible import DictActions, FileActions, Modder
from fleetplan.utils import stable_hash

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)

COMMANDS = ("turn-left", "turn-right", "go-straight", "follow-lane",
            "change-lane-to-left", "change-lane-to-right")

NOISE_PRESETS = {
    "clean": {"lidar_dropout": 0.0, "semantic_noise": 0.0},
    "light": {"lidar_dropout": 0.05, "semantic_noise": 0.05},
    "medium": {"lidar_dropout": 0.15, "semantic_noise": 0.1},
    "heavy": {"lidar_dropout": 0.3, "semantic_noise": 0.2},
}

DEFAULTS = {
    "seed": 0,
    "world": {
        "dt": 0.1,
        "ticks_per_frame": 5,
        "horizon": 10,
        "map": "grid_town",
        "map_size": 200.0,
        "lanes": 2,
        "lane_width": 3.5,
        "lane_change_prob": 0.2,
        "scale": 0.2,
        "goal_spacing": [50.0, 100.0],
        "goal_noise": 1.0,
        "turn_lead": 8.0,
        "route_length": [100.0, 400.0],
        "wheelbase": 2.7,
        "vehicle_extent": [2.25, 1.0],
        "pedestrian_extent": [0.3, 0.3],
        "max_accel": 4.0,
        "max_decel": 8.0,
        "max_steer": 0.6,
        "target_speed": 6.0,
        "pedestrian_speed": 1.4,
        "n_vehicles": 4,
        "n_pedestrians": 2,
        "scenario_rate": 0.5,
        "light_cycle": [10.0, 3.0, 1.0],
        "record_radius": 40.0,
        "episodes": 4,
        "episode_ticks": 600,
        "frames": 5000,
        "expert_ttc": 3.0,
        "ekf_process_noise": [0.05, 0.05, 0.01, 0.2],
        "ekf_gnss_noise": 1.0,
        "ekf_yaw_noise": 0.05,
        "ekf_speed_noise": 0.1,
    },
    "sensor": {
        "lidar_rays": 360,
        "lidar_rings": [0.2, 0.6, 1.0, 1.4],
        "lidar_range": 60.0,
        "ground_ranges": [4.0, 6.0, 8.0, 11.0, 14.0, 18.0, 24.0, 30.0],
        "ground_azimuth_step": 2.0,
        "lidar_dropout": 0.0,
        "semantic_noise": 0.0,
        "intensity": 1.0,
    },
    "grid": {
        "x_range": [-10.0, 70.0],
        "y_range": [-40.0, 40.0],
        "pillar_size": 0.5,
        "out_stride": 2,
        "channels": 64,
        "max_points": 16,
    },
    "perception": {
        "threshold": 0.3,
        "pool_k": 3,
        "theta_max": math.pi,
        "temporal_frames": 1,
        "min_overlap": 0.1,
        "min_radius": 2,
        "batch_size": 8,
        "lr": 1e-3,
        "steps": 2000,
    },
    "planner": {
        "K": 5,
        "embed_dim": 128,
        "hidden": 128,
        "roi_size": [24, 12],
        "roi_forward": [-2.0, 10.0],
        "roi_lateral": [-3.0, 3.0],
        "zero_init_refiner": False,
    },
    "train": {
        "regime": "staged",
        "vehicle_range": 15.0,
        "privileged_batch_size": 512,
        "privileged_lr": 3e-4,
        "privileged_steps": 2000,
        "distill_batch_size": 32,
        "distill_lr": 3e-4,
        "distill_steps": 2000,
        "brake_batch_size": 128,
        "brake_lr": 1e-3,
        "brake_steps": 1000,
        "lambda_other": 0.5,
        "lambda_cmd": 0.1,
        "aux_weight": 1.0,
        "match_gate": 2.0,
        "log_every": 10,
        "divergence_factor": 10.0,
    },
    "control": {
        "lateral_gains": [1.0, 0.5, 0.2],
        "longitudinal_gains": [5.0, 0.5, 1.0],
        "windup": 5.0,
        "aim_index": 4,
        "likelihood_threshold": 0.2,
        "inflation": 0.25,
        "brake_threshold": 0.5,
    },
    "harness": {
        "penalties": {"vehicle": 0.6, "pedestrian": 0.5, "layout": 0.65,
                      "red_light": 0.7, "blocked": 1.0},
        "blocked_time": 60.0,
        "blocked_distance": 1.0,
        "time_budget_speed": 1.0,
        "time_budget_slack": 30.0,
        "routes": 4,
        "presets": ["clean", "light", "medium", "heavy"],
        "seeds": [0, 1, 2],
        "scenarios": ["crossing-pedestrian", "lane-changer", "lead-brake",
                      "red-light-runner"],
        "processes": 1,
    },
}

REGIMES = ("staged", "joint", "none")


def parse_value(s):
    """
    Deserializes a command-line or key=value-file value with YAML, so that
    "3" is an int, "[1, 2]" a list and "true" a bool.
    """
    return YAML(typ="safe", pure=True).load(io.StringIO(s))


def _check_keys(d, defaults, prefix=""):
    for k, v in d.items():
        key = prefix + k
        if k not in defaults:
            raise ValueError("Unknown config key {}".format(key))
        if isinstance(defaults[k], dict):
            if not isinstance(v, dict):
                raise ValueError("Config key {} must be a section".format(key))
            _check_keys(v, defaults[k], key + ".")


def _merge(base, d):
    for k, v in d.items():
        if isinstance(v, dict) and isinstance(base.get(k), dict):
            _merge(base[k], v)
        else:
            base[k] = v


class RunConfig(MSONable):
    """
    All microworld, grid, training, controller and harness knobs.

    Sections are exposed as attributes, e.g. ``cfg.train.distill_lr``.
    """

    def __init__(self, params=None):
        params = params or {}
        _check_keys(params, DEFAULTS)
        d = copy.deepcopy(DEFAULTS)
        _merge(d, copy.deepcopy(params))
        self.params = d
        self._validate()

    def _validate(self):
        g = self.params["grid"]
        for lo, hi in (g["x_range"], g["y_range"]):
            span = (hi - lo) / g["pillar_size"]
            if hi <= lo or abs(span - round(span)) > 1e-9:
                raise ValueError("Grid ranges must be divisible by "
                                 "pillar_size")
        if self.params["train"]["regime"] not in REGIMES:
            raise ValueError("Unknown regime {}".format(
                self.params["train"]["regime"]))
        if self.params["planner"]["K"] < 0:
            raise ValueError("K must be nonnegative")
        for k, v in self.params["harness"]["penalties"].items():
            if not 0 < v <= 1:
                raise ValueError("Penalty {} must lie in (0, 1]".format(k))

    def __getattr__(self, item):
        params = self.__dict__.get("params")
        if params is not None and item in params:
            v = params[item]
            return AttrDict(v) if isinstance(v, dict) else v
        raise AttributeError(item)

    @property
    def waypoint_dt(self):
        return self.params["world"]["dt"] * \
            self.params["world"]["ticks_per_frame"]

    @property
    def commands(self):
        return COMMANDS

    def get(self, key):
        d = self.params
        for tok in key.split("."):
            d = d[tok]
        return d

    def modify(self, modification):
        """
        Returns a new RunConfig with a Modder modification applied, e.g.
        {"_mul": {"train.distill_lr": 0.5}}. The result is re-validated.
        """
        d = copy.deepcopy(self.params)
        Modder().modify(modification, d)
        return RunConfig(d)

    def with_overrides(self, overrides):
        """
        Applies ``section.key=value`` strings in order.
        """
        settings = {}
        for o in overrides or []:
            if "=" not in o:
                raise ValueError("Override {} is not of the form "
                                 "section.key=value".format(o))
            k, v = o.split("=", 1)
            k = k.strip()
            try:
                self.get(k)
            except (KeyError, TypeError):
                raise ValueError("Unknown config key {}".format(k))
            settings[k] = parse_value(v)
        if not settings:
            return self
        return self.modify({"_set": settings})

    def with_preset(self, name):
        if name not in NOISE_PRESETS:
            raise ValueError("Unknown noise preset {}".format(name))
        return self.modify({"_set": {"sensor." + k: v for k, v in
                                     NOISE_PRESETS[name].items()}})

    @classmethod
    def from_file(cls, filename):
        """
        Reads a .yaml/.yml/.json config, or any other file as flat
        ``section.key=value`` lines ("#" starts a comment).
        """
        if not os.path.exists(filename):
            raise FileNotFoundError("config not found: {}".format(filename))
        ext = os.path.splitext(filename)[1].lower()
        if ext in (".yaml", ".yml", ".json"):
            d = loadfn(filename) or {}
            if "params" in d and "@module" in d:
                d = d["params"]
            return cls(d)
        cfg = cls()
        lines = []
        with open(filename) as f:
            for line in f:
                line = line.split("#", 1)[0].strip()
                if line:
                    lines.append(line)
        return cfg.with_overrides(lines)

    def to_file(self, filename):
        """
        Writes YAML/JSON by extension, otherwise flat key=value lines that
        from_file reads back.
        """
        ext = os.path.splitext(filename)[1].lower()
        if ext in (".yaml", ".yml", ".json"):
            dumpfn(self.params, filename)
            return
        with open(filename, "w") as f:
            for k, v in self.flat_items():
                f.write("{}={}\n".format(k, json.dumps(v)))

    def flat_items(self):
        """
        Sorted (dotted key, value) pairs of every leaf; the penalty table
        stays one value.
        """
        out = []

        def walk(d, prefix):
            for k in sorted(d):
                v = d[k]
                if isinstance(v, dict) and k != "penalties":
                    walk(v, prefix + k + ".")
                else:
                    out.append((prefix + k, v))

        walk(self.params, "")
        return out

    def hash(self):
        return stable_hash(self.params)

    def as_dict(self):
        return {"@module": self.__class__.__module__,
                "@class": self.__class__.__name__,
                "params": copy.deepcopy(self.params)}

    @classmethod
    def from_dict(cls, d):
        return cls(d["params"])

    def __eq__(self, other):
        return isinstance(other, RunConfig) and self.params == other.params

    def __repr__(self):
        return "RunConfig({})".format(self.hash()[:10])


class ConfigModder(Modder):
    """
    Applies error handler corrections: Modder modifications of RunConfig
    files and file actions on stage artifacts.
    """

    def __init__(self, actions=None, strict=True):
        actions = actions or [FileActions, DictActions]
        super(ConfigModder, self).__init__(actions, strict)

    def apply_actions(self, actions):
        """
        Applies a list of actions of the form {'dict': config_file,
        'action': moddermodification} or {'file': filename, 'action':
        moddermodification}. A missing config file is written from the
        defaults before it is modified.
        """
        for a in actions:
            if "dict" in a:
                fname = a["dict"]
                cfg = RunConfig.from_file(fname) if os.path.exists(fname) \
                    else RunConfig()
                cfg.modify(a["action"]).to_file(fname)
            elif "file" in a:
                self.modify(a["action"], a["file"])
            else:
                raise ValueError("Unrecognized format: {}".format(a))
