# coding: utf-8

import datetime
import logging
import os
import sys
import tarfile
import traceback
from abc import ABCMeta, abstractmethod
from glob import glob
from itertools import islice
from pprint import pformat

import six

from monty.json import MSONable, MontyDecoder, MontyEncoder
from monty.serialization import dumpfn, loadfn
from monty.shutil import gzip_dir
from monty.tempfile import ScratchDir

from .config import RunConfig
from .utils import get_execution_host_info

"""
This module implements the main Pipeline class, which runs a list of training
and evaluation stages given a set of error handlers, and the abstract base
classes for the Stages, ErrorHandlers and Validators.
"""

__author__ = "Fleetplan Development Team"
__version__ = "0.2"
__date__ = "10/17/26"


logger = logging.getLogger(__name__)


class Pipeline(object):
    """
    The Pipeline is the manager for a list of stages (collect, train,
    distill, evaluate, ...) given a list of error handlers. It works as
    follows:

    1. Stages are run in order. Each stage is set up, run in-process and
       then checked with every error handler.
    2. If a handler detects an error, its correction is applied (usually a
       modification of the run config or deletion of a bad artifact) and the
       stage is rerun, up to max_errors_per_stage times.
    3. A stage without errors is validated with the validators and then
       postprocessed. A failed validation stops the pipeline.

    .. attribute: max_errors

        Maximum number of errors allowed over all stages.

    .. attribute: handlers

        Error handlers checked at the end of every stage attempt.
    """
    LOG_FILE = "pipeline.json"

    def __init__(self, handlers, stages, validators=None,
                 max_errors_per_stage=None, max_errors=1,
                 skip_over_errors=False, scratch_dir=None,
                 gzipped_output=False, checkpoint=False):
        """
        Initializes a Pipeline from a list of stages and error handlers.

        Args:
            handlers ([ErrorHandler]): Error handlers. In order of priority of
                fixing.
            stages ([Stage]): Sequence of Stages to be run.
            validators ([Validator]): Validators to ensure stage success.
            max_errors_per_stage (int): Maximum number of errors per stage
                allowed before exiting. Defaults to None, which means it is
                set to be equal to max_errors.
            max_errors (int): Maximum number of total errors allowed before
                exiting. Defaults to 1.
            skip_over_errors (bool): If set to True, the pipeline will skip
                over error handlers that failed (raised an Exception of some
                sort). Otherwise, it exits on broken handlers.
            scratch_dir (str): If set, the working directory is copied to a
                temporary directory inside scratch_dir, the stages run there,
                and everything is copied back at the end.
            gzipped_output (bool): Whether to gzip the final output.
            checkpoint (bool): Whether to checkpoint the working directory
                after each successful stage, so an interrupted run resumes
                at the next stage. Stored as pipeline.chk.#.tar.gz.
        """
        self.max_errors = max_errors
        self.max_errors_per_stage = max_errors_per_stage or max_errors
        self.stages = stages
        self.handlers = handlers
        self.validators = validators or []
        self.skip_over_errors = skip_over_errors
        self.scratch_dir = scratch_dir
        self.gzipped_output = gzipped_output
        self.checkpoint = checkpoint
        cwd = os.getcwd()
        if self.checkpoint:
            self.restart, self.run_log = Pipeline._load_checkpoint(cwd)
        else:
            self.restart = 0
            self.run_log = []
        self.errors_current_stage = 0
        self.total_errors = 0

    @staticmethod
    def _load_checkpoint(cwd):
        restart = 0
        run_log = []
        chkpts = glob(os.path.join(cwd, "pipeline.chk.*.tar.gz"))
        if chkpts:
            chkpt = sorted(chkpts, key=lambda c: int(c.split(".")[-3]))[-1]
            restart = int(chkpt.split(".")[-3])
            logger.info("Loading from checkpoint file {}...".format(chkpt))
            with tarfile.open(chkpt) as t:
                t.extractall(cwd)
            run_log = loadfn(os.path.join(cwd, Pipeline.LOG_FILE),
                             cls=MontyDecoder)
        return restart, run_log

    @staticmethod
    def _delete_checkpoints(cwd):
        for f in glob(os.path.join(cwd, "pipeline.chk.*.tar.gz")):
            os.remove(f)

    @staticmethod
    def _save_checkpoint(cwd, index):
        try:
            Pipeline._delete_checkpoints(cwd)
            n = os.path.join(cwd, "pipeline.chk.{}.tar.gz".format(index))
            with tarfile.open(n, mode="w:gz", compresslevel=3) as f:
                for name in sorted(os.listdir(cwd)):
                    if name.startswith("pipeline.chk."):
                        continue
                    f.add(os.path.join(cwd, name), arcname=name)
            logger.info("Checkpoint written to {}".format(n))
        except Exception:
            logger.info("Checkpointing failed")
            logger.error(traceback.format_exc())

    @classmethod
    def from_spec(cls, spec):
        """
        Load a Pipeline whose stages are given by a spec dict, typically
        read from a YAML file:

            stages:
            - stage: fleetplan.world.jobs.CollectJob
              params:
                frames: 5000
            - stage: fleetplan.distill.jobs.PrivilegedJob
            stages_common_params:
              config_file: config.yaml
            handlers:
            - hdlr: fleetplan.distill.handlers.NonFiniteLossHandler
            validators:
            - vldr: fleetplan.distill.validators.CheckpointValidator
              params:
                checkpoint: checkpoints/privileged.pt
            pipeline_params:
              max_errors: 4

        Keys starting with $ have environment variables expanded in their
        values.

        Args:
            spec (dict): The spec dict.

        Returns:
            Pipeline instance.
        """
        dec = MontyDecoder()

        def load_class(dotpath):
            modname, classname = dotpath.rsplit(".", 1)
            mod = __import__(modname, globals(), locals(), [classname], 0)
            return getattr(mod, classname)

        def process_params(d):
            decoded = {}
            for k, v in d.items():
                if k.startswith("$"):
                    if isinstance(v, list):
                        v = [os.path.expandvars(i) for i in v]
                    elif isinstance(v, dict):
                        v = {k2: os.path.expandvars(v2)
                             for k2, v2 in v.items()}
                    else:
                        v = os.path.expandvars(v)
                decoded[k.strip("$")] = dec.process_decoded(v)
            return decoded

        common_params = process_params(spec.get("stages_common_params", {}))

        stages = []
        for d in spec["stages"]:
            cls_ = load_class(d["stage"])
            params = process_params(d.get("params", {}))
            for k, v in common_params.items():
                params.setdefault(k, v)
            stages.append(cls_(**params))

        handlers = [load_class(d["hdlr"])(
            **process_params(d.get("params", {})))
            for d in spec.get("handlers", [])]
        validators = [load_class(d["vldr"])(
            **process_params(d.get("params", {})))
            for d in spec.get("validators", [])]
        pipeline_params = process_params(spec.get("pipeline_params", {}))

        return cls(handlers=handlers, stages=stages, validators=validators,
                   **pipeline_params)

    def run(self):
        """
        Runs all the stages.

        Returns:
            The run log: one dict per stage with its corrections.
        """
        cwd = os.getcwd()

        with ScratchDir(self.scratch_dir, create_symbolic_link=True,
                        copy_to_current_on_exit=True,
                        copy_from_current_on_enter=True) as temp_dir:
            self.total_errors = 0
            start = datetime.datetime.now()
            logger.info("Run started at {} in {}.".format(start, temp_dir))
            v = sys.version.replace("\n", " ")
            logger.info("Pipeline running on Python version {}".format(v))
            logger.info("Hostname: {}, Cluster: {}".format(
                *get_execution_host_info()))

            try:
                for stage_n, stage in islice(enumerate(self.stages, 1),
                                             self.restart, None):
                    self._run_stage(stage_n, stage)
                    if self.checkpoint:
                        self.restart = stage_n
                        dumpfn(self.run_log, Pipeline.LOG_FILE,
                               cls=MontyEncoder, indent=4)
                        Pipeline._save_checkpoint(cwd, stage_n)
            except PipelineError as ex:
                logger.error(ex.message)
                if ex.raises:
                    raise RuntimeError("{} errors reached: {}. Exited..."
                                       .format(self.total_errors, ex.message))
            finally:
                logger.info("Logging to {}...".format(Pipeline.LOG_FILE))
                dumpfn(self.run_log, Pipeline.LOG_FILE, cls=MontyEncoder,
                       indent=4)
                end = datetime.datetime.now()
                logger.info("Run ended at {}.".format(end))
                logger.info("Run completed. Total time taken = {}."
                            .format(end - start))
                if self.gzipped_output:
                    gzip_dir(".")

            Pipeline._delete_checkpoints(cwd)

        return self.run_log

    def _run_stage(self, stage_n, stage):
        """
        Runs a single stage.

        Args:
            stage_n: stage number (1 index)
            stage: Stage

        Raises:
            PipelineError on unrecoverable errors, max errors, and stages
            that fail validation
        """
        self.run_log.append({"stage": stage.as_dict(), "corrections": []})
        self.errors_current_stage = 0

        attempt = 0
        while (self.total_errors < self.max_errors and
               self.errors_current_stage < self.max_errors_per_stage):
            attempt += 1
            logger.info(
                "Starting stage no. {} ({}) attempt no. {}. Total errors and "
                "errors in stage thus far = {}, {}.".format(
                    stage_n, stage.name, attempt, self.total_errors,
                    self.errors_current_stage))

            stage.setup()
            stage.run()
            logger.info("{}.run has completed. Checking handlers"
                        .format(stage.name))
            has_error = self._do_check(self.handlers)

            if not has_error:
                for v in self.validators:
                    if v.check():
                        s = "Validation failed: {}".format(v)
                        raise PipelineError(s, True, v)
                stage.postprocess()
                return

            for x in self.run_log[-1]["corrections"]:
                if not x["actions"] and x["handler"].raises_runtime_error:
                    s = "Unrecoverable error for handler: {}. " \
                        "Raising RuntimeError".format(x["handler"])
                    raise PipelineError(s, True, x["handler"])
            for x in self.run_log[-1]["corrections"]:
                if not x["actions"]:
                    s = "Unrecoverable error for handler: {}".format(
                        x["handler"])
                    raise PipelineError(s, False, x["handler"])

        if self.errors_current_stage >= self.max_errors_per_stage:
            logger.info("Max errors per stage reached.")
            raise PipelineError("MaxErrorsPerStage", True)
        else:
            logger.info("Max errors reached.")
            raise PipelineError("MaxErrors", True)

    def _do_check(self, handlers):
        """
        Checks the specified handlers. Returns True iff errors caught.
        """
        corrections = []
        for h in handlers:
            try:
                if h.check():
                    d = h.correct()
                    d["handler"] = h
                    logger.error("\n" + pformat(d, indent=2, width=-1))
                    corrections.append(d)
            except Exception:
                if not self.skip_over_errors:
                    raise
                logger.error("Bad handler {}".format(h))
                logger.error(traceback.format_exc())
                corrections.append({"errors": ["Bad handler {}".format(h)],
                                    "actions": [], "handler": h})
        self.total_errors += len(corrections)
        self.errors_current_stage += len(corrections)
        self.run_log[-1]["corrections"].extend(corrections)
        return len(corrections) > 0


class Stage(six.with_metaclass(ABCMeta, MSONable)):
    """
    Abstract base class defining the interface for a pipeline Stage.
    """

    @abstractmethod
    def setup(self):
        """
        Run before every attempt of a stage. Stages re-read their config
        here so that corrections applied by handlers take effect.
        """
        pass

    @abstractmethod
    def run(self):
        """
        Performs the actual work for the stage.
        """
        pass

    @abstractmethod
    def postprocess(self):
        """
        Called at the end of a stage, *after* error detection and
        validation.
        """
        pass

    @property
    def name(self):
        """
        A nice string name for the stage.
        """
        return self.__class__.__name__


class ConfigStage(Stage):
    """
    A Stage driven by a RunConfig file. The config is re-read on every
    setup, so corrections a handler writes to the file apply to the next
    attempt.
    """

    def __init__(self, config_file="config.yaml", workdir=".",
                 overrides=None):
        """
        Args:
            config_file (str): RunConfig file. A missing file means defaults.
            workdir (str): Root of the run's artifacts (logs/, checkpoints/,
                reports/).
            overrides ([str]): section.key=value overrides applied after the
                file.
        """
        self.config_file = config_file
        self.workdir = workdir
        self.overrides = overrides or []
        self.cfg = None

    def setup(self):
        if self.config_file and os.path.exists(self.config_file):
            cfg = RunConfig.from_file(self.config_file)
        else:
            cfg = RunConfig()
        self.cfg = cfg.with_overrides(self.overrides)
        logger.info("{} using config {}".format(self.name, self.cfg.hash()))

    def path(self, *parts):
        return os.path.join(self.workdir, *parts)

    def postprocess(self):
        pass

    def as_dict(self):
        d = {"@module": self.__class__.__module__,
             "@class": self.__class__.__name__}
        d.update({k: v for k, v in self.__dict__.items()
                  if k != "cfg" and not k.startswith("_")})
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: v for k, v in d.items() if not k.startswith("@")})


class ErrorHandler(six.with_metaclass(ABCMeta, MSONable)):
    """
    Abstract base class defining the interface for an ErrorHandler.
    """

    raises_runtime_error = True
    """
    Whether this handler causes the pipeline to raise a runtime error if it
    cannot handle the error (i.e. if correct returns a dict with
    "actions": None, or "actions": []).
    """

    @abstractmethod
    def check(self):
        """
        Called at the end of each stage attempt to check for errors.

        Returns:
            (bool) Indicating if errors are detected.
        """
        pass

    @abstractmethod
    def correct(self):
        """
        Called when an error is detected. Performs corrective measures.

        Returns:
            (dict) JSON serializable dict that describes the errors and
            actions taken. E.g.
            {"errors": list_of_errors, "actions": list_of_actions_taken}.
            If this is an unfixable error, actions should be set to None.
        """
        pass


class Validator(six.with_metaclass(ABCMeta, MSONable)):
    """
    Abstract base class defining the interface for a Validator. A Validator
    differs from an ErrorHandler in that it does not correct a run and is run
    only at the end of a Stage. If errors are detected by a Validator, the
    pipeline is stopped.
    """

    @abstractmethod
    def check(self):
        """
        Called at the end of a stage.

        Returns:
            (bool) Indicating if errors are detected.
        """
        pass


class PipelineError(Exception):
    """
    Exception class for Pipeline errors.
    """

    def __init__(self, message, raises=False, validator=None):
        """
        Initializes the error with a message.

        Args:
            message (str): Message passed to Exception
            raises (bool): Whether this should raise a runtime error when
                caught
            validator (Validator/ErrorHandler): Validator or ErrorHandler
                that caused the exception.
        """
        super(PipelineError, self).__init__(message)
        self.raises = raises
        self.validator = validator
        self.message = message
