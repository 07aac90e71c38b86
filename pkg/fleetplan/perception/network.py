# coding: utf-8

"""
The pillar backbone and the detection / semantic heads.

A shared point network encodes each pillar, the pillar features are
scattered to a dense map-view canvas and a small convolutional stack halves
the resolution once to produce the feature grid f. Every head is a 3x3
convolution followed by a stride-2 3x3 up-convolution back to pillar
resolution.
"""

import logging

import torch
import torch.nn.functional as F
from torch import nn

from fleetplan.perception.pillars import PILLAR_DIMS

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)

CENTER_BIAS = -2.19


def scatter_max(x, index, size):
    """
    Row-wise max of x over equal index values; rows of empty groups are 0.
    """
    out = x.new_zeros((size, x.shape[1]))
    if x.shape[0] == 0:
        return out
    return out.scatter_reduce(0, index[:, None].expand_as(x), x,
                              reduce="amax", include_self=False)


class PFNLayer(nn.Module):
    """
    Shared per-point linear map, batch norm over the valid points and ReLU.
    Inner layers append the pillar max to every point; the last layer
    returns the pillar max only.
    """

    def __init__(self, in_channels, out_channels, last_layer=False):
        super(PFNLayer, self).__init__()
        self.last_layer = last_layer
        if not last_layer:
            out_channels = out_channels // 2
        self.linear = nn.Linear(in_channels, out_channels, bias=False)
        self.norm = nn.BatchNorm1d(out_channels, eps=1e-3, momentum=0.01)

    def forward(self, x, inverse, n_pillars):
        x = self.linear(x)
        # batch statistics need at least two points
        training = self.training and x.shape[0] > 1
        if x.shape[0] > 0:
            x = F.batch_norm(x, self.norm.running_mean,
                             self.norm.running_var, self.norm.weight,
                             self.norm.bias, training, self.norm.momentum,
                             self.norm.eps)
        x = F.relu(x)
        x_max = scatter_max(x, inverse, n_pillars)
        if self.last_layer:
            return x_max
        return torch.cat([x, x_max[inverse]], dim=1)


def _conv(cin, cout, stride=1):
    return nn.Sequential(
        nn.Conv2d(cin, cout, 3, stride=stride, padding=1, bias=False),
        nn.BatchNorm2d(cout, eps=1e-3, momentum=0.01),
        nn.ReLU())


class PillarBackbone(nn.Module):
    """
    Sparse pillars to the feature grid f of shape (B, C, H/2, W/2).

    Args:
        spec (GridSpec): the grid; pillars of other grids are rejected.
        point_dims ((int, int)): point network widths.
        widths ((int, int, int)): channels of the three conv stages. The
            second stage has stride 2; a stride-2 1x1 skip from the first
            stage is fused with the third by a 1x1 convolution to C
            channels.
    """

    def __init__(self, spec, point_dims=(32, 32), widths=(32, 64, 64),
                 in_dims=PILLAR_DIMS):
        super(PillarBackbone, self).__init__()
        if spec.out_stride != 2:
            raise ValueError("The backbone downsamples exactly once; "
                             "out_stride {} is unsupported".format(
                                 spec.out_stride))
        self.spec = spec
        dims = [in_dims] + list(point_dims)
        self.pfn = nn.ModuleList([
            PFNLayer(dims[i], dims[i + 1], last_layer=i == len(dims) - 2)
            for i in range(len(dims) - 1)])
        self.stage1 = _conv(dims[-1], widths[0])
        self.stage2 = _conv(widths[0], widths[1], stride=2)
        self.stage3 = _conv(widths[1], widths[2])
        self.skip = nn.Conv2d(widths[0], widths[2], 1, stride=2)
        self.fuse = nn.Conv2d(2 * widths[2], spec.channels, 1)
        self.canvas_channels = dims[-1]

    def check(self, pillars):
        if pillars.spec != self.spec:
            raise ValueError("Pillars built on {} fed to a backbone of "
                             "{}".format(pillars.spec, self.spec))

    def canvas(self, pillars):
        """
        The dense (B, C0, H, W) scatter of the pillar features.
        """
        self.check(pillars)
        device = next(self.parameters()).device
        dtype = next(self.parameters()).dtype
        h, w = self.spec.shape
        b = pillars.batch_size
        feats = torch.as_tensor(pillars.features, dtype=dtype, device=device)
        inverse = torch.as_tensor(pillars.inverse, device=device)
        n = len(pillars)
        for layer in self.pfn:
            feats = layer(feats, inverse, n)
        coords = torch.as_tensor(pillars.coords, device=device)
        flat = coords[:, 0] * h * w + coords[:, 1] * w + coords[:, 2]
        canvas = feats.new_zeros((b * h * w, feats.shape[1]))
        canvas = canvas.index_copy(0, flat, feats)
        return canvas.view(b, h, w, -1).permute(0, 3, 1, 2).contiguous()

    def forward(self, pillars):
        x = self.stage1(self.canvas(pillars))
        y = self.stage3(self.stage2(x))
        return self.fuse(torch.cat([y, self.skip(x)], dim=1))


class HeadMaps(object):
    """
    Raw head outputs at pillar resolution, each (B, k, H, W).

    Args:
        center: centerness logits, channels (vehicle, pedestrian).
        orientation: (sin, cos) of the box yaw, unnormalized.
        box: (log half-length, log half-width).
        semantic: logits of road, solid and broken lane markings, each an
            independent binary classifier.
        spec (GridSpec): the grid of the maps.
    """

    def __init__(self, center, orientation, box, semantic, spec=None):
        self.center = center
        self.orientation = orientation
        self.box = box
        self.semantic = semantic
        self.spec = spec

    @property
    def centerness(self):
        return torch.sigmoid(self.center)

    @property
    def semantic_probs(self):
        return torch.sigmoid(self.semantic)

    @property
    def shape(self):
        return tuple(self.center.shape[-2:])

    def detach(self):
        return HeadMaps(self.center.detach(), self.orientation.detach(),
                        self.box.detach(), self.semantic.detach(), self.spec)


def _head(channels, out):
    return nn.Sequential(
        nn.Conv2d(channels, channels, 3, padding=1),
        nn.ReLU(),
        nn.ConvTranspose2d(channels, out, 3, stride=2, padding=1,
                           output_padding=1))


class PerceptionHeads(nn.Module):

    def __init__(self, spec):
        super(PerceptionHeads, self).__init__()
        c = spec.channels
        self.spec = spec
        self.center = _head(c, 2)
        self.orientation = _head(c, 2)
        self.box = _head(c, 2)
        self.semantic = _head(c, 3)
        nn.init.constant_(self.center[-1].bias, CENTER_BIAS)

    def forward(self, f):
        return HeadMaps(self.center(f), self.orientation(f), self.box(f),
                        self.semantic(f), self.spec)


class PerceptionModel(nn.Module):
    """
    Backbone and heads; forward returns (f, HeadMaps).
    """

    def __init__(self, spec, point_dims=(32, 32), widths=(32, 64, 64)):
        super(PerceptionModel, self).__init__()
        self.spec = spec
        self.backbone = PillarBackbone(spec, point_dims, widths)
        self.heads = PerceptionHeads(spec)

    def forward(self, pillars):
        f = self.backbone(pillars)
        return f, self.heads(f)
