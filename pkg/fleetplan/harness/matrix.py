# coding: utf-8

"""
The evaluation matrix: every config drives every route under every sensor
noise preset and seed. Episodes are independent and may run in a process
pool; aggregation runs in the calling process over the ordered results.
"""

import logging
import multiprocessing
import os

import numpy as np
from monty.json import MontyEncoder
from monty.serialization import dumpfn

from fleetplan.config import RunConfig
from fleetplan.harness.episode import run_episode
from fleetplan.harness.policies import ExpertPolicy, LearnedPolicy, ZeroPolicy
from fleetplan.harness.scoring import EVENT_TYPES, score_route
from fleetplan.world.roadmap import map_from_config
from fleetplan.world.route import route_from_config

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)

COLUMNS = ("DS", "RC", "IS") + tuple("{}/km".format(t) for t in EVENT_TYPES)
REPORT_JSON = "report.json"
REPORT_TXT = "report.txt"


def make_policy(entry, cfg):
    """
    Policy of a matrix entry: {"policy": "learned", "student": path,
    "brake": path}, {"policy": "expert"} or {"policy": "zero"}.
    """
    kind = entry.get("policy", "learned")
    if kind == "expert":
        return ExpertPolicy(cfg)
    if kind == "zero":
        return ZeroPolicy()
    if kind == "learned":
        return LearnedPolicy.from_checkpoints(entry["student"],
                                              entry.get("brake"), cfg)
    raise ValueError("Unknown policy {}".format(kind))


def missing_checkpoints(entry):
    if entry.get("policy", "learned") != "learned":
        return []
    paths = [entry.get("student")] + ([entry["brake"]]
                                      if entry.get("brake") else [])
    return [p for p in paths if not p or not os.path.exists(p)]


def route_for(cfg, index):
    """
    The index-th evaluation route; it depends on the seed and index only,
    so every preset and seed drives the same road.
    """
    roadmap = map_from_config(cfg)
    rng = np.random.default_rng([int(cfg.seed), int(index), 11])
    return roadmap, route_from_config(roadmap, rng, cfg)


def episode_jobs(entries, cfg, routes, presets, seeds):
    jobs = []
    for entry in entries:
        for r in range(routes):
            for preset in presets:
                for seed in seeds:
                    jobs.append((entry, cfg.as_dict(), r, preset, seed))
    return jobs


def evaluate_episode(job, logs_dir=None):
    """
    Runs and scores one (entry, route, preset, seed) cell.

    Returns:
        dict with the cell keys and the EpisodeScore fields.
    """
    entry, cfg_dict, r, preset, seed = job
    cfg = RunConfig.from_dict(cfg_dict).with_overrides(
        entry.get("overrides")).with_preset(preset)
    scenarios = list(cfg.harness.scenarios)
    chosen = [scenarios[r % len(scenarios)]] if scenarios else []
    roadmap, route = route_for(cfg, r)
    policy = make_policy(entry, cfg)
    log = run_episode(policy, route, chosen, seed, cfg=cfg, roadmap=roadmap)
    score = score_route(log)
    if logs_dir:
        log.save(os.path.join(logs_dir, entry["name"],
                              "route{}_{}_seed{}".format(r, preset, seed)))
    d = {k: v for k, v in score.as_dict().items()
         if not k.startswith("@")}
    d.update({"config": entry["name"], "route": r, "preset": preset,
              "seed": int(seed), "scenarios": chosen,
              "config_hash": cfg.hash()})
    return d


def _evaluate(args):
    return evaluate_episode(*args)


def summarize(episodes):
    """
    Mean and std of every column over the episodes of one config. Per-km
    means are totals over the total distance, as leaderboards report them;
    their std is over episodes.
    """
    values = {"DS": [e["driving_score"] for e in episodes],
              "RC": [e["route_completion"] for e in episodes],
              "IS": [e["infraction_score"] for e in episodes]}
    km = sum(e["km"] for e in episodes)
    mean, std = {}, {}
    for t in EVENT_TYPES:
        col = "{}/km".format(t)
        values[col] = [e["per_km"][t] for e in episodes]
        total = sum(e["infractions"][t] for e in episodes)
        mean[col] = total / max(km, 0.001)
    ddof = 1 if len(episodes) > 1 else 0
    for col in COLUMNS:
        v = np.asarray(values[col], dtype=float)
        if col not in mean:
            mean[col] = float(v.mean())
        std[col] = float(v.std(ddof=ddof))
    return {"mean": mean, "std": std, "episodes": len(episodes),
            "km": km}


def run_matrix(entries, cfg=None, routes=None, presets=None, seeds=None,
               processes=None, logs_dir=None):
    """
    Evaluates every entry on routes x presets x seeds episodes.

    Args:
        entries ([dict]): configs to evaluate; each has a "name", a
            "policy" and, for learned policies, "student" and optionally
            "brake" checkpoints and "overrides".
        cfg (RunConfig): base configuration.
        routes (int): route count, default harness.routes.
        presets ([str]): noise presets, default harness.presets.
        seeds ([int]): seeds, default harness.seeds.
        processes (int): worker processes, default harness.processes.
        logs_dir (str): where episode logs are saved, if given.

    Returns:
        the report dict. Entries with missing checkpoints are listed under
        "skipped".
    """
    if not entries:
        raise ValueError("The evaluation matrix needs at least one config")
    cfg = cfg or RunConfig()
    h = cfg.harness
    routes = h.routes if routes is None else routes
    presets = list(h.presets if presets is None else presets)
    seeds = list(h.seeds if seeds is None else seeds)
    processes = h.processes if processes is None else processes
    names = [e["name"] for e in entries]
    if len(set(names)) != len(names):
        raise ValueError("Config names must be unique: {}".format(names))

    runnable, skipped = [], []
    for entry in entries:
        missing = missing_checkpoints(entry)
        if missing:
            logger.warning("Skipping {}: checkpoint not found: {}".format(
                entry["name"], ", ".join(str(m) for m in missing)))
            skipped.append({"config": entry["name"],
                            "reason": "checkpoint not found: {}".format(
                                ", ".join(str(m) for m in missing))})
        else:
            runnable.append(entry)

    jobs = [(j, logs_dir) for j in
            episode_jobs(runnable, cfg, routes, presets, seeds)]
    logger.info("Evaluating {} episodes of {} configs".format(
        len(jobs), len(runnable)))
    if processes > 1 and len(jobs) > 1:
        pool = multiprocessing.Pool(processes)
        try:
            episodes = pool.map(_evaluate, jobs)
        finally:
            pool.close()
            pool.join()
    else:
        episodes = [_evaluate(j) for j in jobs]

    configs = {}
    for entry in runnable:
        mine = [e for e in episodes if e["config"] == entry["name"]]
        configs[entry["name"]] = dict(summarize(mine), entry=entry)
    return {"columns": list(COLUMNS), "configs": configs,
            "episodes": episodes, "skipped": skipped,
            "matrix": {"routes": routes, "presets": presets,
                       "seeds": seeds},
            "config": cfg.as_dict(), "config_hash": cfg.hash()}


def format_table(report):
    """
    The human-readable summary: one row per config, mean +- std per column.
    """
    header = ["config"] + list(report["columns"])
    rows = [header]
    for name in sorted(report["configs"]):
        c = report["configs"][name]
        rows.append([name] + ["{:.3f} +- {:.3f}".format(c["mean"][k],
                                                        c["std"][k])
                              for k in report["columns"]])
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = ["  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip()
             for r in rows]
    for s in report.get("skipped", []):
        lines.append("skipped {}: {}".format(s["config"], s["reason"]))
    return "\n".join(lines) + "\n"


def write_report(report, out_dir):
    if not os.path.isdir(out_dir):
        os.makedirs(out_dir)
    dumpfn(report, os.path.join(out_dir, REPORT_JSON), cls=MontyEncoder,
           indent=2, sort_keys=True)
    with open(os.path.join(out_dir, REPORT_TXT), "w") as f:
        f.write(format_table(report))
    logger.info("Wrote report to {}".format(out_dir))
    return out_dir
