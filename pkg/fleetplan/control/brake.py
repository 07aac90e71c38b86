# coding: utf-8

"""
The binary brake classifier over the seven privileged scene features.
"""

import logging

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from fleetplan.world.expert import N_FEATURES

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)


class BrakeClassifier(nn.Module):

    def __init__(self, n_features=N_FEATURES, hidden=32):
        super(BrakeClassifier, self).__init__()
        self.net = nn.Sequential(nn.Linear(n_features, hidden),
                                 nn.ReLU(inplace=True),
                                 nn.Linear(hidden, 1))
        self.register_buffer("steps", torch.zeros((), dtype=torch.long))

    @property
    def trained(self):
        return int(self.steps) > 0

    def forward(self, features):
        return self.net(features).squeeze(-1)

    def loss(self, features, labels):
        return F.binary_cross_entropy_with_logits(
            self(features), labels.to(features.dtype))

    def score(self, features):
        """
        Brake probability of one feature vector or a batch.

        Raises:
            RuntimeError: the classifier was never trained or restored.
        """
        if not self.trained:
            raise RuntimeError("Brake classifier is untrained")
        x = torch.as_tensor(np.asarray(features, dtype=np.float32))
        with torch.no_grad():
            p = torch.sigmoid(self(x))
        return float(p) if p.dim() == 0 else p.numpy()
