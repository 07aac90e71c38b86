# coding: utf-8

import logging
import os
import shutil

"""
This module defines the supported actions. All actions are static methods
grouped into classes so a set of actions can be namespaced easily.
"""

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)


def get_nested_dict(input_dict, key, create=True):
    """
    Walks a "."-separated key, e.g. "train.lr", down a nested dict.

    Returns:
        (innermost dict, last key token)
    """
    current = input_dict
    toks = key.split(".")
    for tok in toks[:-1]:
        if tok not in current:
            if not create:
                raise KeyError(key)
            current[tok] = {}
        current = current[tok]
        if not isinstance(current, dict):
            raise ValueError("Keyword {} does not refer to a section."
                             .format(key))
    return current, toks[-1]


class DictActions(object):
    """
    Mongo-like modifications on a (nested) dict. Supported keywords:

        _set
        _unset
        _inc
        _mul

    Nested keys use "." as separator, e.g. {"_mul": {"train.lr": 0.5}}.
    """

    @staticmethod
    def set(input_dict, settings):
        for k, v in settings.items():
            (d, key) = get_nested_dict(input_dict, k)
            d[key] = v

    @staticmethod
    def unset(input_dict, settings):
        for k in settings.keys():
            (d, key) = get_nested_dict(input_dict, k, create=False)
            del d[key]

    @staticmethod
    def inc(input_dict, settings):
        for k, v in settings.items():
            (d, key) = get_nested_dict(input_dict, k)
            if key in d:
                d[key] += v
            else:
                d[key] = v

    @staticmethod
    def mul(input_dict, settings):
        for k, v in settings.items():
            (d, key) = get_nested_dict(input_dict, k, create=False)
            if key not in d:
                raise ValueError("Cannot scale missing keyword {}".format(k))
            d[key] *= v


class FileActions(object):
    """
    Supported file actions. For FileActions, the modder takes in a filename
    as a string, preferably a full path.
    """

    @staticmethod
    def file_delete(filename, settings):
        """
        Deletes a file. {'_file_delete': {'mode': "actual"}}

        Args:
            filename (str): Filename.
            settings (dict): Must be {"mode": actual/simulated}. Simulated
                mode only logs the action without performing it.
        """
        if len(settings) != 1:
            raise ValueError("Settings must only contain one item with key "
                             "'mode'.")
        mode = settings.get("mode")
        if mode == "actual":
            try:
                os.remove(filename)
            except OSError:
                pass
        elif mode == "simulated":
            logger.info("Simulated removal of {}".format(filename))

    @staticmethod
    def file_copy(filename, settings):
        """
        Copies a file. {'_file_copy': {'dest': 'new_file_name'}}
        """
        for k, v in settings.items():
            if k.startswith("dest"):
                shutil.copyfile(filename, v)

    @staticmethod
    def file_move(filename, settings):
        """
        Moves a file. {'_file_move': {'dest': 'new_file_name'}}
        """
        if len(settings) != 1 or "dest" not in settings:
            raise ValueError("Settings must only contain one item with key "
                             "'dest'.")
        shutil.move(filename, settings["dest"])
