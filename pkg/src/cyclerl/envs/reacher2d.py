"""Planar two-joint reaching task.

A kinematic arm with equal link lengths 0.1 m; joint torques in [-1, 1] feed
the first-order actuator model thetadd_i = 20*a_i - 2*thetad_i. Each env
step pays the decrease of the fingertip-to-target distance potential
(100 * distance) achieved during the step, minus the timestep-scaled action
cost 0.05*|a|^2*timestep: episode rewards telescope to 100 * (initial -
final distance) minus the accumulated action costs, so reaching dominates
the return and acting costs a little. The progress term needs no explicit
timestep factor; per-step distance changes already shrink with the
timestep. Episodes last 2.4 s.
"""

import math

import numpy as np

from cyclerl.envs.base import Env, EnvConfig

LINK_LENGTH = 0.1
TORQUE_GAIN = 20.0
DAMPING = 2.0
ACTION_COST = 0.05
PROGRESS_GAIN = 100.0


def _wrap_angle(theta):
    # into (-pi, pi]
    theta = math.fmod(theta, 2.0 * math.pi)
    if theta <= -math.pi:
        theta += 2.0 * math.pi
    elif theta > math.pi:
        theta -= 2.0 * math.pi
    return theta


class Reacher2D(Env):
    obs_dim = 6
    action_dim = 2

    def __init__(self, env_timestep_ms=2, episode_limit_ms=2400):
        super().__init__(EnvConfig(env_timestep_ms, episode_limit_ms))
        self._th1 = self._th2 = 0.0
        self._om1 = self._om2 = 0.0
        self._tx = self._ty = 0.0
        self._dist = 0.0

    def _sample_initial(self, rng):
        self._th1 = rng.uniform(-math.pi, math.pi)
        self._th2 = rng.uniform(-math.pi, math.pi)
        self._om1 = 0.0
        self._om2 = 0.0
        # uniform over the reachable disc of radius 2 * LINK_LENGTH
        radius = 2.0 * LINK_LENGTH * math.sqrt(rng.uniform())
        angle = rng.uniform(0.0, 2.0 * math.pi)
        self._tx = radius * math.cos(angle)
        self._ty = radius * math.sin(angle)
        self._dist = self._target_distance()

    def _observe(self):
        return np.array([self._th1, self._th2, self._om1, self._om2,
                         self._tx, self._ty])

    def fingertip(self):
        a = self._th1
        b = self._th1 + self._th2
        return (LINK_LENGTH * (math.cos(a) + math.cos(b)),
                LINK_LENGTH * (math.sin(a) + math.sin(b)))

    def _target_distance(self):
        fx, fy = self.fingertip()
        return math.hypot(fx - self._tx, fy - self._ty)

    def _advance(self, action):
        dt = self.config.env_timestep
        a1 = float(action[0])
        a2 = float(action[1])
        th1, th2, om1, om2 = self._th1, self._th2, self._om1, self._om2
        self._th1 = _wrap_angle(th1 + dt * om1)
        self._th2 = _wrap_angle(th2 + dt * om2)
        self._om1 = om1 + dt * (TORQUE_GAIN * a1 - DAMPING * om1)
        self._om2 = om2 + dt * (TORQUE_GAIN * a2 - DAMPING * om2)
        dist = self._target_distance()
        progress = self._dist - dist
        self._dist = dist
        reward = PROGRESS_GAIN * progress - ACTION_COST * (a1 * a1 + a2 * a2) * dt
        return reward, False
