"""One-step actor-critic: the simplest learn function for the interaction
loop (U = 1, buffer of one transition), with the per-episode discount
accumulator I and plain (non-Adam) gradient steps."""

from dataclasses import dataclass

import numpy as np

from cyclerl.agents.common import GaussianMlpPolicy, ValueMlp
from cyclerl.errors import ConfigurationError, UsageError


@dataclass(frozen=True)
class AcConfig:
    discount: float = 0.99
    policy_lr: float = 1e-4
    value_lr: float = 1e-4

    def __post_init__(self):
        if not 0.0 <= self.discount <= 1.0:
            raise ConfigurationError(f"discount must lie in [0, 1], got {self.discount}")
        if self.policy_lr <= 0.0 or self.value_lr <= 0.0:
            raise ConfigurationError("learning rates must be positive")


class AcAgent:
    """Networks mirror the PPO architecture (64-64 tanh, state-independent
    log-std head)."""

    def __init__(self, obs_dim, action_dim, config, policy_rng, init_rng=None,
                 hidden=(64, 64), activation="tanh"):
        self.config = config
        rng = init_rng if init_rng is not None else policy_rng
        self.policy = GaussianMlpPolicy(obs_dim, action_dim, hidden, activation, rng)
        self.value = ValueMlp(obs_dim, hidden, activation, rng)
        self.policy_rng = policy_rng
        self.discount_accumulator = 1.0   # I

    def act(self, obs):
        return self.policy.sample(obs, self.policy_rng)

    def learn(self, buffer):
        if len(buffer) != 1:
            raise UsageError(
                f"one-step actor-critic expects a single-transition buffer, got {len(buffer)}")
        tr = buffer[0]
        gamma = self.config.discount
        state = tr.state[None, :]
        next_state = tr.next_state[None, :]

        # td error with the pre-update value snapshot
        v_s = self.value.values(self.value.params, state)[0]
        v_next = self.value.values(self.value.params, next_state)[0]
        delta = tr.reward + (0.0 if tr.terminal else gamma * v_next) - v_s

        scale = self.discount_accumulator * delta
        policy_grad = self.policy.log_prob_gradient(
            self.policy.params, state, tr.action[None, :], np.array([1.0]))
        self.policy.params += self.config.policy_lr * scale * policy_grad
        value_grad = self.value.value_gradient(self.value.params, state,
                                               np.array([1.0]))
        self.value.params += self.config.value_lr * scale * value_grad

        if tr.terminal:
            self.discount_accumulator = 1.0
        else:
            self.discount_accumulator = gamma * self.discount_accumulator
