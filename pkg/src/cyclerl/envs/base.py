"""Environment interface: fixed-timestep dynamics advanced by explicit Euler.

Every step advances the simulation by exactly one environment timestep and
returns a reward already scaled by that timestep, so episode returns stay
comparable (to first order) when the timestep is refined.
"""

from dataclasses import dataclass

import numpy as np

from cyclerl.errors import ConfigurationError, UsageError


@dataclass(frozen=True)
class EnvConfig:
    """Timing contract of an environment.

    Both durations are integer milliseconds; the episode limit must be an
    exact multiple of the timestep.
    """

    env_timestep_ms: int
    episode_limit_ms: int

    def __post_init__(self):
        if self.env_timestep_ms <= 0:
            raise ConfigurationError(
                f"env_timestep_ms must be positive, got {self.env_timestep_ms}")
        if self.episode_limit_ms % self.env_timestep_ms != 0:
            raise ConfigurationError(
                f"episode_limit_ms={self.episode_limit_ms} is not a multiple of "
                f"env_timestep_ms={self.env_timestep_ms}")

    @property
    def env_timestep(self):
        """Timestep in seconds."""
        return self.env_timestep_ms / 1000.0

    @property
    def episode_limit_steps(self):
        return self.episode_limit_ms // self.env_timestep_ms


@dataclass
class StepResult:
    reward: float
    next_observation: np.ndarray
    terminal: bool


class Env:
    """Base class holding the clock and reset/terminal bookkeeping.

    Subclasses implement _sample_initial(rng), _observe() and
    _advance(action) -> (reward, failed).
    """

    obs_dim: int
    action_dim: int

    def __init__(self, config):
        self.config = config
        self._steps = 0
        self._needs_reset = True

    @property
    def steps_taken(self):
        """Env steps since the last reset; the clock is steps * timestep."""
        return self._steps

    def reset(self, rng):
        """Draw an initial state and zero the clock."""
        self._sample_initial(rng)
        self._steps = 0
        self._needs_reset = False
        return self._observe()

    def step(self, action):
        """Advance the dynamics by one timestep under `action`.

        The action must already be clipped to [-1, 1] per dimension by the
        caller.
        """
        if self._needs_reset:
            raise UsageError("step() called on a terminated or unreset environment")
        action = np.asarray(action, dtype=np.float64)
        if action.shape != (self.action_dim,):
            raise ConfigurationError(
                f"action shape {action.shape} != ({self.action_dim},)")
        reward, failed = self._advance(action)
        self._steps += 1
        terminal = failed or self._steps >= self.config.episode_limit_steps
        if terminal:
            self._needs_reset = True
        return StepResult(reward, self._observe(), terminal)

    def _sample_initial(self, rng):
        raise NotImplementedError

    def _observe(self):
        raise NotImplementedError

    def _advance(self, action):
        raise NotImplementedError
