# coding: utf-8

import unittest

import numpy as np

from fleetplan.harness.episode import EpisodeLog, event_array
from fleetplan.harness.scoring import EVENT_TYPES, infraction_score, \
    score_route

PENALTIES = {"vehicle": 0.6, "pedestrian": 0.5, "layout": 0.65,
             "red_light": 0.7, "blocked": 1.0}


def crafted(length, progress, distance, events=(), offroad=0.0,
            status="timeout", penalties=None):
    """
    A finished log of one tick per event (plus one carrying the motion).
    """
    ticks = [{"progress": np.float64(progress),
              "distance": np.float64(distance),
              "offroad_distance": np.float64(offroad),
              "events": event_array([])}]
    for e in events:
        ticks.append({"progress": np.float64(progress),
                      "distance": np.float64(0.0),
                      "offroad_distance": np.float64(0.0),
                      "events": event_array([e])})
    log = EpisodeLog({"route_length": float(length),
                      "penalties": penalties or PENALTIES}, ticks)
    log.finish(status)
    return log


class ScoreRouteTest(unittest.TestCase):

    def test_completion(self):
        score = score_route(crafted(4000.0, 3000.0, 3000.0))
        self.assertEqual(score.route_completion, 0.75)
        self.assertEqual(score.infraction_score, 1.0)
        self.assertEqual(score.driving_score, 0.75)
        self.assertEqual(score.km, 3.0)

    def test_two_vehicle_collisions(self):
        score = score_route(crafted(100.0, 100.0, 100.0,
                                    ["vehicle", "vehicle"]))
        self.assertAlmostEqual(score.infraction_score, 0.36)
        self.assertEqual(score.infractions["vehicle"], 2)
        self.assertAlmostEqual(score.per_km["vehicle"], 20.0)

    def test_driving_score_product(self):
        score = score_route(crafted(100.0, 50.0, 50.0, ["vehicle"],
                                    penalties={"vehicle": 0.8}))
        self.assertEqual(score.route_completion, 0.5)
        self.assertAlmostEqual(score.infraction_score, 0.8)
        self.assertAlmostEqual(score.driving_score, 0.40)

    def test_motionless(self):
        score = score_route(crafted(100.0, 0.0, 0.0, ["blocked"],
                                    status="blocked"))
        self.assertEqual(score.route_completion, 0.0)
        self.assertEqual(score.infraction_score, 1.0)
        self.assertEqual(score.driving_score, 0.0)
        self.assertEqual(score.infractions["blocked"], 1)
        self.assertEqual(score.flags, ["zero_distance"])
        self.assertEqual(score.per_km["blocked"], 1.0)

    def test_mixed_penalties(self):
        score = score_route(crafted(200.0, 100.0, 100.0,
                                    ["red_light", "layout", "pedestrian"]))
        self.assertAlmostEqual(score.infraction_score, 0.7 * 0.65 * 0.5)
        self.assertAlmostEqual(score.driving_score, 0.5 * 0.7 * 0.65 * 0.5)

    def test_offroad_discount(self):
        score = score_route(crafted(200.0, 100.0, 100.0, ["offroad"],
                                    offroad=25.0))
        self.assertAlmostEqual(score.route_completion, 0.375)
        self.assertEqual(score.infraction_score, 1.0)
        self.assertEqual(score.infractions["offroad"], 1)

    def test_completed_route(self):
        score = score_route(crafted(100.0, 99.4, 99.4, status="completed"))
        self.assertEqual(score.route_completion, 1.0)
        self.assertEqual(score.status, "completed")

    def test_overshoot_clipped(self):
        score = score_route(crafted(100.0, 130.0, 130.0))
        self.assertEqual(score.route_completion, 1.0)

    def test_progress_is_best_reached(self):
        log = crafted(100.0, 40.0, 40.0)
        log.ticks.append({"progress": np.float64(30.0),
                          "distance": np.float64(10.0),
                          "offroad_distance": np.float64(0.0),
                          "events": event_array([])})
        self.assertEqual(score_route(log).route_completion, 0.4)

    def test_penalty_override(self):
        log = crafted(100.0, 100.0, 100.0, ["vehicle"])
        self.assertAlmostEqual(score_route(log).infraction_score, 0.6)
        self.assertAlmostEqual(score_route(log, {"vehicle": 0.9})
                               .infraction_score, 0.9)

    def test_rejects(self):
        log = crafted(100.0, 10.0, 10.0)
        log.meta["complete"] = False
        self.assertRaises(ValueError, score_route, log)
        self.assertRaises(ValueError, score_route,
                          crafted(100.0, 10.0, 10.0, ["speeding"]))
        self.assertRaises(ValueError, score_route, crafted(0.0, 0.0, 0.0))

    def test_bounds_and_monotonicity(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            length = rng.uniform(10, 500)
            progress = rng.uniform(0, 1.2 * length)
            distance = rng.uniform(0, 2 * length)
            events = list(rng.choice(EVENT_TYPES, rng.integers(0, 6)))
            score = score_route(crafted(length, progress, distance, events,
                                        rng.uniform(0, distance)))
            self.assertTrue(0.0 <= score.route_completion <= 1.0)
            self.assertTrue(0.0 < score.infraction_score <= 1.0)
            self.assertLessEqual(score.driving_score,
                                 score.route_completion)
            extra = score_route(crafted(length, progress, distance,
                                        events + [rng.choice(EVENT_TYPES)],
                                        0.0))
            base = score_route(crafted(length, progress, distance, events,
                                       0.0))
            self.assertLessEqual(extra.infraction_score,
                                 base.infraction_score)
            self.assertLessEqual(extra.driving_score, base.driving_score)

    def test_infraction_score(self):
        self.assertEqual(infraction_score({"offroad": 3}, PENALTIES), 1.0)
        self.assertEqual(infraction_score({"blocked": 2}, PENALTIES), 1.0)
        self.assertAlmostEqual(infraction_score({"pedestrian": 3},
                                                PENALTIES), 0.125)

    def test_serialization(self):
        score = score_route(crafted(100.0, 50.0, 50.0, ["vehicle"]))
        d = score.as_dict()
        self.assertEqual(d["infractions"]["vehicle"], 1)
        self.assertEqual(type(score).from_dict(d).driving_score,
                         score.driving_score)


if __name__ == "__main__":
    unittest.main()
