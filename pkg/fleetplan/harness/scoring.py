# coding: utf-8

"""
Route scores of a finished EpisodeLog: route completion, infraction score,
driving score and infractions per km. Scoring reads nothing but the log, so
rescoring a stored episode reproduces its score.
"""

import logging

import numpy as np
from monty.json import MSONable

from fleetplan.config import RunConfig

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)

EVENT_TYPES = ("vehicle", "pedestrian", "layout", "red_light", "offroad",
               "blocked")


class EpisodeScore(MSONable):
    """
    Args:
        route_completion (float): in [0, 1], discounted by the off-road
            share of the distance driven.
        infractions ({type: int}): event counts for every EVENT_TYPES entry.
        km (float): distance driven in km.
        infraction_score (float): product of the penalty factors, in (0, 1].
        driving_score (float): route_completion * infraction_score.
        per_km ({type: float}): counts per km, or raw counts when nothing
            was driven (flag "zero_distance").
        flags ([str]): scoring remarks.
        status (str): how the episode ended.
    """

    def __init__(self, route_completion, infractions, km, infraction_score,
                 driving_score, per_km, flags=None, status=None):
        self.route_completion = route_completion
        self.infractions = infractions
        self.km = km
        self.infraction_score = infraction_score
        self.driving_score = driving_score
        self.per_km = per_km
        self.flags = flags or []
        self.status = status

    def __repr__(self):
        return "EpisodeScore(DS={:.3f}, RC={:.3f}, IS={:.3f}, {})".format(
            self.driving_score, self.route_completion, self.infraction_score,
            {k: v for k, v in self.infractions.items() if v})


def count_events(ticks):
    counts = {k: 0 for k in EVENT_TYPES}
    for rec in ticks:
        for e in rec.get("events", ()):
            e = str(e)
            if e not in counts:
                raise ValueError("Unknown event type {}".format(e))
            counts[e] += 1
    return counts


def infraction_score(counts, penalties):
    """
    Product over events of the penalty factor of their type. Types without a
    factor (offroad) do not enter the product.
    """
    score = 1.0
    for k, n in counts.items():
        if k in penalties and n:
            score *= float(penalties[k]) ** n
    return score


def score_route(log, penalties=None):
    """
    Scores a complete EpisodeLog.

    Args:
        log (EpisodeLog): the episode.
        penalties ({type: factor}): defaults to the factors stored in the
            log meta, else to the configured defaults.

    Returns:
        EpisodeScore
    """
    if not log.complete:
        raise ValueError("Cannot score an incomplete episode log")
    meta = log.meta
    if penalties is None:
        penalties = meta.get("penalties") or \
            RunConfig().harness.penalties
    length = float(meta["route_length"])
    if length <= 0:
        raise ValueError("Route length must be positive")
    ticks = log.ticks
    progress = max([float(r["progress"]) for r in ticks] + [0.0])
    distance = float(sum(float(r.get("distance", 0.0)) for r in ticks))
    offroad = float(sum(float(r.get("offroad_distance", 0.0))
                        for r in ticks))
    status = meta.get("status")
    completion = 1.0 if status == "completed" else \
        float(np.clip(progress / length, 0.0, 1.0))
    if distance > 0:
        completion *= 1.0 - min(offroad / distance, 1.0)
    counts = count_events(ticks)
    i_score = infraction_score(counts, penalties)
    km = distance / 1000.0
    flags = []
    if km > 0:
        per_km = {k: n / km for k, n in counts.items()}
    else:
        per_km = {k: float(n) for k, n in counts.items()}
        flags.append("zero_distance")
    return EpisodeScore(completion, counts, km, i_score,
                        completion * i_score, per_km, flags, status)
