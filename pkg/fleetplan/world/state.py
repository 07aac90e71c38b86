# coding: utf-8

"""
World state and its time stepping. Vehicles move under a kinematic bicycle
model, pedestrians walk scripted paths and scripted traffic vehicles drive
themselves. step_world is pure: it returns a new WorldState and never
mutates its input.
"""

import copy
import logging
import math

import numpy as np

from fleetplan.geometry import box_corners

__author__ = "Fleetplan Development Team"
__version__ = "0.1"
__date__ = "10/17/26"

logger = logging.getLogger(__name__)

VEHICLE = 0
PEDESTRIAN = 1
CLASS_NAMES = {VEHICLE: "vehicle", PEDESTRIAN: "pedestrian"}
EGO_ID = 0


class WorldError(ValueError):
    """
    Raised on invalid world manipulation, e.g. an action for an unknown
    actor.
    """
    pass


class OffRoadError(WorldError):
    """
    The ego left the drivable area; the episode is flagged and the frame
    dropped.
    """
    pass


class Control(object):
    """
    steer in [-1, 1] (positive turns left), throttle and brake in [0, 1].
    """

    __slots__ = ("steer", "throttle", "brake")

    def __init__(self, steer=0.0, throttle=0.0, brake=0.0):
        self.steer = float(steer)
        self.throttle = float(throttle)
        self.brake = float(brake)

    def clipped(self):
        return Control(np.clip(self.steer, -1.0, 1.0),
                       np.clip(self.throttle, 0.0, 1.0),
                       np.clip(self.brake, 0.0, 1.0))

    def as_array(self):
        return np.array([self.steer, self.throttle, self.brake])

    def is_finite(self):
        return bool(np.all(np.isfinite(self.as_array())))

    def __eq__(self, other):
        return isinstance(other, Control) and \
            np.array_equal(self.as_array(), other.as_array())

    def __repr__(self):
        return "Control(steer={:.3f}, throttle={:.3f}, brake={:.3f})".format(
            self.steer, self.throttle, self.brake)


class ActorState(object):
    """
    A vehicle or pedestrian.

    Args:
        actor_id (int): unique id; the ego vehicle has id 0.
        kind (int): VEHICLE or PEDESTRIAN.
        x, y, yaw: pose in m and rad.
        speed (float): m/s, nonnegative.
        hl, hw (float): half-length and half-width in m.
        control (Control): last applied control.
        script: optional object with act(state, actor) -> Control (vehicles)
            or advance(state, actor, dt) -> ActorState (pedestrians).
        s (float): progress along the script path.
    """

    def __init__(self, actor_id, kind, x, y, yaw, speed=0.0, hl=2.25,
                 hw=1.0, control=None, script=None, s=0.0):
        if hl <= 0 or hw <= 0:
            raise ValueError("Actor extent must be positive")
        if speed < 0:
            raise ValueError("Actor speed must be nonnegative")
        self.actor_id = int(actor_id)
        self.kind = int(kind)
        self.x = float(x)
        self.y = float(y)
        self.yaw = float(yaw)
        self.speed = float(speed)
        self.hl = float(hl)
        self.hw = float(hw)
        self.control = control or Control()
        self.script = script
        self.s = float(s)

    @property
    def pose(self):
        return np.array([self.x, self.y, self.yaw])

    @property
    def xy(self):
        return np.array([self.x, self.y])

    def corners(self, inflate=0.0):
        return box_corners(self.x, self.y, self.yaw, self.hl + inflate,
                           self.hw + inflate)

    def as_row(self):
        """
        [id, class, x, y, yaw, speed, hl, hw], the DrivingLog actor row.
        """
        return np.array([self.actor_id, self.kind, self.x, self.y, self.yaw,
                         self.speed, self.hl, self.hw])

    def copy(self):
        new = copy.copy(self)
        new.control = Control(self.control.steer, self.control.throttle,
                              self.control.brake)
        return new

    def __repr__(self):
        return "ActorState({}, {}, x={:.2f}, y={:.2f}, yaw={:.3f}, " \
               "v={:.2f})".format(self.actor_id, CLASS_NAMES[self.kind],
                                  self.x, self.y, self.yaw, self.speed)


class Dynamics(object):
    """
    Kinematic bicycle parameters.
    """

    def __init__(self, wheelbase=2.7, max_accel=4.0, max_decel=8.0,
                 max_steer=0.6):
        self.wheelbase = wheelbase
        self.max_accel = max_accel
        self.max_decel = max_decel
        self.max_steer = max_steer

    @classmethod
    def from_config(cls, cfg):
        w = cfg.world
        return cls(w.wheelbase, w.max_accel, w.max_decel, w.max_steer)


class WorldState(object):
    """
    Everything that evolves in the micro-world.

    Args:
        time (float): seconds since episode start.
        actors ([ActorState]): actors with unique ids.
        roadmap (RoadMap): the static map, shared between states.
        dt (float): the configured tick.
        rng_seed (int): seed from which per-tick randomness derives.
        dynamics (Dynamics): vehicle model parameters.
        tick (int): number of steps taken.
    """

    def __init__(self, time, actors, roadmap, dt=0.1, rng_seed=0,
                 dynamics=None, tick=0):
        if time < 0:
            raise ValueError("Time must be nonnegative")
        ids = [a.actor_id for a in actors]
        if len(set(ids)) != len(ids):
            raise WorldError("Actor ids must be unique")
        self.time = float(time)
        self.actors = list(actors)
        self.roadmap = roadmap
        self.dt = float(dt)
        self.rng_seed = int(rng_seed)
        self.dynamics = dynamics or Dynamics()
        self.tick = int(tick)

    @property
    def traffic_lights(self):
        """
        [(position, phase)] at the current time.
        """
        return [(l.position, l.phase(self.time)) for l in self.roadmap.lights]

    def actor(self, actor_id):
        for a in self.actors:
            if a.actor_id == actor_id:
                return a
        raise WorldError("Unknown actor id {}".format(actor_id))

    @property
    def ego(self):
        return self.actor(EGO_ID)

    def tick_rng(self, stream=0):
        """
        A generator depending only on (seed, tick, stream).
        """
        return np.random.default_rng([self.rng_seed, self.tick, stream])

    def snapshot(self):
        """
        Actor rows (A, 8), see ActorState.as_row.
        """
        if not self.actors:
            return np.zeros((0, 8))
        return np.stack([a.as_row() for a in self.actors])


def bicycle_step(actor, control, dt, dyn):
    """
    One explicit Euler step of the kinematic bicycle model, using the speed
    before the update for the pose.
    """
    new = actor.copy()
    control = control.clipped()
    v = actor.speed
    delta = control.steer * dyn.max_steer
    new.x = actor.x + v * math.cos(actor.yaw) * dt
    new.y = actor.y + v * math.sin(actor.yaw) * dt
    new.yaw = actor.yaw + v / dyn.wheelbase * math.tan(delta) * dt
    new.yaw = (new.yaw + math.pi) % (2 * math.pi) - math.pi
    accel = control.throttle * dyn.max_accel - control.brake * dyn.max_decel
    new.speed = max(0.0, v + accel * dt)
    new.control = control
    return new


def step_world(state, actions, dt):
    """
    Advances the world by one tick.

    Args:
        state (WorldState): current state; left untouched.
        actions ({actor_id: Control}): controls for vehicles without a
            script. Scripted actors supply their own.
        dt (float): must equal state.dt.

    Returns:
        The next WorldState.
    """
    if abs(dt - state.dt) > 1e-9:
        raise WorldError("dt {} differs from the configured tick {}".format(
            dt, state.dt))
    ids = {a.actor_id for a in state.actors}
    for k, c in actions.items():
        if k not in ids:
            raise WorldError("Action for unknown actor id {}".format(k))
        if not c.is_finite():
            raise WorldError("Non-finite action for actor {}".format(k))

    new_actors = []
    for a in state.actors:
        if a.kind == PEDESTRIAN:
            if a.script is None:
                new_actors.append(a.copy())
            else:
                new_actors.append(a.script.advance(state, a, dt))
            continue
        if a.actor_id in actions:
            control = actions[a.actor_id]
        elif a.script is not None:
            control = a.script.act(state, a)
        else:
            raise WorldError("Missing action for vehicle {}".format(
                a.actor_id))
        new = bicycle_step(a, control, dt, state.dynamics)
        if a.script is not None:
            new.s = a.script.progress(new, a.s)
        new_actors.append(new)
    return WorldState(state.time + dt, new_actors, state.roadmap, state.dt,
                      state.rng_seed, state.dynamics, state.tick + 1)
