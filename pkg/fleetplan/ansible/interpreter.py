# coding: utf-8

"""
This module implements a Modder class that performs modifications on objects
using supported actions.
"""

import re

from fleetplan.ansible.actions import DictActions

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"


class Modder(object):
    """
    Modifies a dict/file/object using a mongo-like language. An underscore
    precedes action keywords instead of mongo's $.

    Examples:
    >>> modder = Modder()
    >>> d = {"train": {"lr": 0.001}}
    >>> modder.modify({'_mul': {'train.lr': 0.5}}, d)
    >>> d['train']['lr']
    0.0005
    """
    def __init__(self, actions=None, strict=True):
        """
        Args:
            actions ([Action]): A sequence of supported action classes.
                Defaults to None, which means only DictActions are supported.
            strict (bool): In strict mode an unsupported action raises
                ValueError; otherwise it is ignored.
        """
        self.supported_actions = {}
        actions = actions if actions is not None else [DictActions]
        for action in actions:
            for i in dir(action):
                if (not re.match(r"__\w+__", i)) and \
                        callable(getattr(action, i)):
                    self.supported_actions["_" + i] = getattr(action, i)
        self.strict = strict

    def modify(self, modification, obj):
        """
        In-place modification of obj.

        Args:
            modification (dict): {action_keyword: settings}, e.g.
                {'_set': {'train.batch_size': 64}}
            obj (dict/str): dict for DictActions, a path for FileActions.
        """
        for action, settings in modification.items():
            if action in self.supported_actions:
                self.supported_actions[action].__call__(obj, settings)
            elif self.strict:
                raise ValueError("{} is not a supported action!"
                                 .format(action))

    def modify_object(self, modification, obj):
        """
        Modify an object supporting the MSONable as_dict/from_dict API and
        return the modified copy.
        """
        d = obj.as_dict()
        self.modify(modification, d)
        return obj.from_dict(d)
