#!/usr/bin/env python
# coding: utf-8

"""
fleet is the command line entry of fleetplan. Every subcommand resolves the
run config (file, then --set overrides), writes it to the workdir as
run_config.yaml and runs the matching Pipeline inside the workdir, so the
stages, handlers and validators all read the same file.
"""

import argparse
import logging
import os
import sys

from monty.os import cd
from monty.serialization import dumpfn, loadfn

from fleetplan.cli.replay import replay
from fleetplan.config import RunConfig
from fleetplan.distill.handlers import (LossDivergenceHandler,
                                        NonFiniteLossHandler)
from fleetplan.distill.jobs import (BrakeJob, DistillJob, PerceptionJob,
                                    PrivilegedJob)
from fleetplan.distill.validators import CheckpointValidator
from fleetplan.harness.jobs import EvaluateJob
from fleetplan.harness.matrix import REPORT_TXT
from fleetplan.harness.validators import ReportValidator
from fleetplan.pipeline import Pipeline, PipelineError
from fleetplan.utils import data_root
from fleetplan.world.handlers import FrameShortfallHandler
from fleetplan.world.jobs import CollectJob
from fleetplan.world.validators import DrivingLogValidator

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)

CONFIG_FILE = "config.yaml"
RUN_CONFIG = "run_config.yaml"
LOG_FORMAT = "%(asctime)s %(message)s"

ABLATIONS = {
    "range": [("range_{}".format(r), ["train.vehicle_range={}".format(r)])
              for r in (5.0, 15.0, 25.0)],
    "regime": [("regime_{}".format(r), ["train.regime={}".format(r)])
               for r in ("staged", "joint", "none")],
    "refinement": [("refinement_K{}".format(k), ["planner.K={}".format(k)])
                   for k in (0, 1, 5)],
}

example_yaml = """
# An example fleetplan pipeline spec: collect expert logs, train the
# privileged planner, distil the student and evaluate it. Run it with
#
#     fleet run spec.yaml
#
# Each stage is given by `stage: <full class path>` with its params.

stages:
- stage: fleetplan.world.jobs.CollectJob
  params:
    frames: 5000
- stage: fleetplan.distill.jobs.PerceptionJob
- stage: fleetplan.distill.jobs.PrivilegedJob
- stage: fleetplan.distill.jobs.BrakeJob
- stage: fleetplan.distill.jobs.DistillJob
- stage: fleetplan.harness.jobs.EvaluateJob
  params:
    save_logs: True


# Parameters common to all stages. Keys starting with $ are expanded from
# the environment.

stages_common_params:
  config_file: config.yaml
  $workdir: $FLEETPLAN_DATA


# Error handlers, in order of priority of fixing.
handlers:
- hdlr: fleetplan.world.handlers.FrameShortfallHandler
- hdlr: fleetplan.distill.handlers.NonFiniteLossHandler
  params:
    metrics_file: metrics/distill.jsonl
    checkpoint: checkpoints/student.pt


# Validators run after every successful stage.
validators:
- vldr: fleetplan.world.validators.DrivingLogValidator


# Pipeline parameters.
pipeline_params:
  max_errors: 5
  checkpoint: True
"""


def setup_logging(workdir, verbose=False):
    logging.basicConfig(format=LOG_FORMAT, level=logging.INFO,
                        filename=os.path.join(workdir, "run.log"), force=True)
    if verbose:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logging.getLogger().addHandler(handler)


def effective_config(args):
    """
    The config file (explicit, else <workdir>/config.yaml if present, else
    the defaults) with --set and --seed applied in that order.
    """
    path = args.config or os.path.join(args.workdir, CONFIG_FILE)
    if args.config or os.path.exists(path):
        cfg = RunConfig.from_file(path)
    else:
        cfg = RunConfig()
    overrides = list(args.set or [])
    if getattr(args, "seed", None) is not None:
        overrides.append("seed={}".format(args.seed))
    return cfg.with_overrides(overrides)


def run_pipeline(workdir, handlers, stages, validators, max_errors):
    with cd(workdir):
        pipeline = Pipeline(handlers, stages, validators,
                            max_errors=max_errors)
        return pipeline.run()


def prepare(args):
    workdir = os.path.abspath(args.workdir)
    cfg = effective_config(args)
    cfg.to_file(os.path.join(workdir, RUN_CONFIG))
    logger.info("Config {} written to {}".format(cfg.hash(), workdir))
    return workdir, cfg


def training_handlers(job, config_file=RUN_CONFIG):
    return [NonFiniteLossHandler(config_file, job.metrics, job.checkpoint),
            LossDivergenceHandler(config_file, job.metrics, job.checkpoint)]


def collect(args):
    workdir, _ = prepare(args)
    job = CollectJob(config_file=RUN_CONFIG, frames=args.frames)
    run_pipeline(workdir,
                 [FrameShortfallHandler(RUN_CONFIG, job.logs_dir,
                                        args.frames)],
                 [job], [DrivingLogValidator(job.logs_dir)],
                 args.max_errors)
    print("Collected {} frames".format(job.summary["frames"]))


def train(job_cls, kind):
    def _train(args):
        workdir, _ = prepare(args)
        job = job_cls(config_file=RUN_CONFIG, logs_dir=args.logs,
                      steps=args.steps)
        run_pipeline(workdir, training_handlers(job), [job],
                     [CheckpointValidator(job.checkpoint, RUN_CONFIG, kind)],
                     args.max_errors)
        print("Wrote {}".format(os.path.join(workdir, job.checkpoint)))
    return _train


def evaluate(args):
    if args.processes is not None:
        args.set = list(args.set or []) + [
            "harness.processes={}".format(args.processes)]
    workdir, _ = prepare(args)
    if args.policy == "learned":
        student = os.path.abspath(args.checkpoint) if args.checkpoint \
            else os.path.join(workdir, "checkpoints", "student.pt")
        if not os.path.exists(student):
            raise FileNotFoundError("checkpoint not found: {}".format(
                student))
        brake = os.path.abspath(args.brake) if args.brake \
            else os.path.join(workdir, "checkpoints", "brake.pt")
        if not os.path.exists(brake):
            if args.brake:
                raise FileNotFoundError("checkpoint not found: {}".format(
                    brake))
            logger.info("No brake classifier, the student brakes alone")
            brake = None
        entries = [{"name": "student", "policy": "learned",
                    "student": student, "brake": brake}]
    else:
        entries = [{"name": args.policy, "policy": args.policy}]
    job = EvaluateJob(config_file=RUN_CONFIG, entries=entries,
                      report_dir=args.report_dir, save_logs=args.save_logs,
                      routes=args.routes, presets=args.presets,
                      seeds=args.seeds)
    run_pipeline(workdir, [], [job], [ReportValidator(args.report_dir)],
                 args.max_errors)
    with open(os.path.join(workdir, args.report_dir, REPORT_TXT)) as f:
        print(f.read().rstrip())


def replay_log(args):
    files = replay(args.log, args.out, args.every)
    print("Rendered {} frames to {}".format(len(files), args.out))


def ablation_variants(axis):
    axes = sorted(ABLATIONS) if axis == "all" else [axis]
    return [(a, name, overrides) for a in axes
            for name, overrides in ABLATIONS[a]]


def ablate(args):
    """
    Writes one config per variant under <workdir>/ablations/<name> and a
    plan.json listing them. With --run each variant trains its privileged
    planner and student on the shared logs and is evaluated; perception
    and brake checkpoints of the workdir are shared by all variants.
    """
    workdir = os.path.abspath(args.workdir)
    base = effective_config(args)
    root = os.path.join(workdir, "ablations")
    plan = []
    for axis, name, overrides in ablation_variants(args.axis):
        cfg = base.with_overrides(overrides)
        vdir = os.path.join(root, name)
        if not os.path.isdir(vdir):
            os.makedirs(vdir)
        cfg.to_file(os.path.join(vdir, CONFIG_FILE))
        plan.append({"name": name, "axis": axis, "overrides": overrides,
                     "config_hash": cfg.hash()})
        print(name)
    dumpfn(plan, os.path.join(root, "plan.json"), indent=2)
    logger.info("Queued {} ablation configs".format(len(plan)))
    if not args.run:
        return

    logs = os.path.join(workdir, args.logs)
    perception = os.path.join(workdir, "checkpoints", "perception.pt")
    brake = os.path.join(workdir, "checkpoints", "brake.pt")
    for v in plan:
        vdir = os.path.join(root, v["name"])
        privileged = PrivilegedJob(config_file=CONFIG_FILE, logs_dir=logs,
                                   steps=args.steps)
        student = DistillJob(config_file=CONFIG_FILE, logs_dir=logs,
                             steps=args.steps, perception=perception)
        evaluation = EvaluateJob(config_file=CONFIG_FILE,
                                 brake=brake if os.path.exists(brake)
                                 else None)
        logger.info("Running ablation {}".format(v["name"]))
        run_pipeline(vdir,
                     training_handlers(privileged, CONFIG_FILE) +
                     training_handlers(student, CONFIG_FILE),
                     [privileged, student, evaluation],
                     [ReportValidator(evaluation.report_dir)],
                     args.max_errors)


def run_spec(args):
    logger.info("Spec file is {}".format(args.spec_file))
    Pipeline.from_spec(loadfn(args.spec_file)).run()


def print_example(args):
    print(example_yaml)


def make_parser():
    parser = argparse.ArgumentParser(
        prog="fleet", description="""
    fleet drives the fleetplan stack: collect expert logs, train perception,
    the privileged planner and the brake classifier, distil the student,
    evaluate closed loop and replay logs.""")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", default=None,
                        help="Run config (YAML/JSON or key=value lines). "
                             "Defaults to <workdir>/config.yaml if present.")
    common.add_argument("-w", "--workdir", default=data_root("."),
                        help="Directory of logs, checkpoints and reports. "
                             "Defaults to $FLEETPLAN_DATA or the cwd.")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="Config override, e.g. planner.K=1. "
                             "May be repeated.")
    common.add_argument("--max-errors", type=int, default=5,
                        help="Corrections allowed before giving up.")
    common.add_argument("-v", "--verbose", action="store_true",
                        help="Mirror the run log to stderr.")

    subparsers = parser.add_subparsers()

    p = subparsers.add_parser("collect", parents=[common],
                              help="Record expert driving logs.")
    p.add_argument("--frames", type=int, default=None,
                   help="Frames to record, default world.frames.")
    p.add_argument("--seed", type=int, default=None, help="Run seed.")
    p.set_defaults(func=collect)

    for name, job_cls, kind, text in [
            ("train-perception", PerceptionJob, "perception",
             "Pre-train the perception backbone."),
            ("train-privileged", PrivilegedJob, "privileged",
             "Train the planner on ground-truth rasters."),
            ("train-brake", BrakeJob, "brake",
             "Train the brake classifier."),
            ("distill", DistillJob, "student",
             "Distil the student from the privileged planner.")]:
        p = subparsers.add_parser(name, parents=[common], help=text)
        p.add_argument("--logs", default="logs",
                       help="Driving log root, relative to the workdir.")
        p.add_argument("--steps", type=int, default=None,
                       help="Optimizer steps, default from the config.")
        p.add_argument("--seed", type=int, default=None, help="Run seed.")
        p.set_defaults(func=train(job_cls, kind))

    p = subparsers.add_parser("evaluate", parents=[common],
                              help="Run the closed-loop evaluation matrix.")
    p.add_argument("--policy", choices=["learned", "expert", "zero"],
                   default="learned")
    p.add_argument("--checkpoint", default=None,
                   help="Student checkpoint, default "
                        "<workdir>/checkpoints/student.pt.")
    p.add_argument("--brake", default=None,
                   help="Brake classifier checkpoint.")
    p.add_argument("--routes", type=int, default=None)
    p.add_argument("--presets", nargs="+", default=None)
    p.add_argument("--seeds", type=int, nargs="+", default=None)
    p.add_argument("--processes", type=int, default=None)
    p.add_argument("--save-logs", action="store_true",
                   help="Keep every episode log under the report dir.")
    p.add_argument("--report-dir", default="reports")
    p.set_defaults(func=evaluate)

    p = subparsers.add_parser("replay", parents=[common],
                              help="Render a driving or episode log.")
    p.add_argument("log", help="Log directory.")
    p.add_argument("--out", default="replay", help="Output directory.")
    p.add_argument("--every", type=int, default=1,
                   help="Render every n-th frame.")
    p.set_defaults(func=replay_log)

    p = subparsers.add_parser("ablate", parents=[common],
                              help="Queue or run the ablation matrix.")
    p.add_argument("--axis", choices=sorted(ABLATIONS) + ["all"],
                   default="all")
    p.add_argument("--run", action="store_true",
                   help="Train and evaluate every variant.")
    p.add_argument("--logs", default="logs")
    p.add_argument("--steps", type=int, default=None)
    p.set_defaults(func=ablate)

    p = subparsers.add_parser("run", help="Run a pipeline spec file.")
    p.add_argument("spec_file", help="YAML/JSON spec file.")
    p.set_defaults(func=run_spec, workdir=".", verbose=False)

    p = subparsers.add_parser("example",
                              help="Print an example pipeline spec.")
    p.set_defaults(func=print_example)
    return parser


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_help()
        return 0
    if args.func is print_example:
        args.func(args)
        return 0
    if not os.path.isdir(args.workdir):
        os.makedirs(args.workdir)
    setup_logging(args.workdir, args.verbose)
    try:
        args.func(args)
    except (FileNotFoundError, ValueError, PipelineError,
            RuntimeError) as ex:
        logger.error(str(ex))
        print("error: {}".format(ex), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
