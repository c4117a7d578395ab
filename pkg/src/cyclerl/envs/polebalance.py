"""Cart-pole balance task with a survival reward.

Standard inverted-pendulum dynamics (cart mass 1 kg, pole mass 0.1 kg,
half-length 0.5 m, force limit 10 N) integrated by explicit Euler. Each env
step alive pays +1 * timestep; the episode fails when |angle| > 0.5 rad or
|cart position| > 2.4 m, and is capped at 16 s.
"""

import math

import numpy as np

from cyclerl.envs.base import Env, EnvConfig

GRAVITY = 9.8
CART_MASS = 1.0
POLE_MASS = 0.1
POLE_HALF_LENGTH = 0.5
FORCE_MAG = 10.0
ANGLE_LIMIT = 0.5
POSITION_LIMIT = 2.4
RESET_SCALE = 0.05


class PoleBalance(Env):
    obs_dim = 4
    action_dim = 1

    def __init__(self, env_timestep_ms=4, episode_limit_ms=16000):
        super().__init__(EnvConfig(env_timestep_ms, episode_limit_ms))
        self._x = self._xd = self._phi = self._phid = 0.0

    def _sample_initial(self, rng):
        self._x = rng.uniform(-RESET_SCALE, RESET_SCALE)
        self._xd = rng.uniform(-RESET_SCALE, RESET_SCALE)
        self._phi = rng.uniform(-RESET_SCALE, RESET_SCALE)
        self._phid = rng.uniform(-RESET_SCALE, RESET_SCALE)

    def _observe(self):
        return np.array([self._x, self._xd, self._phi, self._phid])

    def _advance(self, action):
        dt = self.config.env_timestep
        force = FORCE_MAG * float(action[0])
        x, xd, phi, phid = self._x, self._xd, self._phi, self._phid

        total_mass = CART_MASS + POLE_MASS
        sin_phi = math.sin(phi)
        cos_phi = math.cos(phi)
        temp = (force + POLE_MASS * POLE_HALF_LENGTH * phid * phid * sin_phi) / total_mass
        phidd = (GRAVITY * sin_phi - cos_phi * temp) / (
            POLE_HALF_LENGTH * (4.0 / 3.0 - POLE_MASS * cos_phi * cos_phi / total_mass))
        xdd = temp - POLE_MASS * POLE_HALF_LENGTH * phidd * cos_phi / total_mass

        self._x = x + dt * xd
        self._xd = xd + dt * xdd
        self._phi = phi + dt * phid
        self._phid = phid + dt * phidd

        failed = abs(self._phi) > ANGLE_LIMIT or abs(self._x) > POSITION_LIMIT
        return dt, failed
