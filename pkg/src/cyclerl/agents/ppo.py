"""Clipped-surrogate policy optimization.

Each learn call snapshots the policy and value parameters, computes
lambda-return targets and normalized advantages once, then runs N epochs of
shuffled minibatch Adam updates: the policy by the clipped-ratio gradient,
the value head by the squared-error gradient toward the targets.
"""

import logging
from dataclasses import dataclass

import numpy as np

from cyclerl.agents.common import GaussianMlpPolicy, ValueMlp
from cyclerl.errors import ConfigurationError, NumericalError, UsageError
from cyclerl.nn import adam

log = logging.getLogger(__name__)

RATIO_EXP_CLAMP = 20.0


@dataclass(frozen=True)
class PpoConfig:
    batch_size: int        # b; equals the learning period
    minibatch_size: int    # m
    epochs: int = 10       # N
    clip: float = 0.2      # epsilon
    discount: float = 0.99
    trace_decay: float = 0.95
    lr: float = 3e-4

    def __post_init__(self):
        if not 1 <= self.minibatch_size <= self.batch_size:
            raise ConfigurationError(
                f"need 1 <= m <= b, got m={self.minibatch_size}, b={self.batch_size}")
        if self.epochs < 0:
            raise ConfigurationError(f"epochs must be >= 0, got {self.epochs}")
        if not 0.0 < self.clip < 1.0:
            raise ConfigurationError(f"clip must lie in (0, 1), got {self.clip}")
        if not 0.0 < self.discount <= 1.0:
            raise ConfigurationError(f"discount must lie in (0, 1], got {self.discount}")
        if not 0.0 <= self.trace_decay <= 1.0:
            raise ConfigurationError(
                f"trace_decay must lie in [0, 1], got {self.trace_decay}")


def lambda_returns(rewards, next_states, terminals, value_fn, gamma, lam):
    """Per-step lambda-return targets over an ordered batch.

    value_fn must be the frozen value snapshot taken at learn entry. Episode
    segments end wherever a transition is terminal; a batch that ends
    mid-episode bootstraps from value_fn at the last next-state (the backward
    recursion is seeded with that value).
    """
    b = len(rewards)
    if b == 0:
        raise UsageError("lambda_returns needs a non-empty batch")
    next_values = value_fn(next_states)
    targets = np.empty(b)
    tail = next_values[-1]
    for t in range(b - 1, -1, -1):
        if terminals[t]:
            tail = rewards[t]
        else:
            tail = rewards[t] + gamma * ((1.0 - lam) * next_values[t] + lam * tail)
        targets[t] = tail
    return targets


def normalize_advantages(raw):
    """Shift/scale to zero mean and unit population std, with a 1e-8
    denominator guard; a single-element batch normalizes to zero."""
    raw = np.asarray(raw, dtype=np.float64)
    if raw.size == 0:
        raise UsageError("normalize_advantages needs at least one element")
    if raw.size == 1:
        return np.zeros(1)
    if np.all(raw == raw[0]):   # exactly constant batch
        return np.zeros(raw.size)
    return (raw - raw.mean()) / (raw.std() + 1e-8)


def clipped_gradient_coefficient(rho, advantage, clip):
    """Multiplier c_t with policy gradient contribution c_t * grad log pi_t.

    The unclipped branch (c = -rho * advantage) is active when
    rho*h <= clip(rho)*h, or when the ratio still lies inside
    [1-clip, 1+clip]; otherwise the contribution is exactly zero.
    """
    rho = np.asarray(rho, dtype=np.float64)
    advantage = np.asarray(advantage, dtype=np.float64)
    unclipped = rho * advantage
    clipped = np.clip(rho, 1.0 - clip, 1.0 + clip) * advantage
    in_range = (rho >= 1.0 - clip) & (rho <= 1.0 + clip)
    active = (unclipped <= clipped) | in_range
    return np.where(active, -unclipped, 0.0)


class PpoNetworks:
    """64-64 policy (mean + state-independent log-std) and 64-64 value
    network, each with its own Adam state."""

    def __init__(self, obs_dim, action_dim, lr, init_rng,
                 hidden=(64, 64), activation="tanh"):
        self.policy = GaussianMlpPolicy(obs_dim, action_dim, hidden, activation, init_rng)
        self.value = ValueMlp(obs_dim, hidden, activation, init_rng)
        self.policy_adam = adam.AdamState(self.policy.params.size, lr=lr)
        self.value_adam = adam.AdamState(self.value.params.size, lr=lr)


def ppo_learn(buffer, networks, config, shuffle_rng):
    """One full learn call over a buffer holding exactly batch_size ordered
    transitions. Raises NumericalError (parameters left at their last finite
    values) if any gradient goes non-finite."""
    if len(buffer) != config.batch_size:
        raise UsageError(
            f"buffer holds {len(buffer)} transitions, batch size is {config.batch_size}")
    states, actions, rewards, next_states, terminals = buffer.ordered()

    policy = networks.policy
    value = networks.value
    frozen_value = value.params.copy()
    old_policy = policy.params.copy()

    def frozen_value_fn(s):
        return value.values(frozen_value, s)

    targets = lambda_returns(rewards, next_states, terminals, frozen_value_fn,
                             config.discount, config.trace_decay)
    advantages = normalize_advantages(targets - value.values(value.params, states))
    log_prob_old = policy.log_prob(old_policy, states, actions)
    if not np.all(np.isfinite(log_prob_old)):
        raise NumericalError("old-policy log-probabilities are not finite")

    b = config.batch_size
    m = config.minibatch_size
    for _ in range(config.epochs):
        perm = shuffle_rng.permutation(b)
        for start in range(0, b, m):
            idx = perm[start:start + m]
            _minibatch_update(networks, config, states[idx], actions[idx],
                              advantages[idx], targets[idx], log_prob_old[idx])


def _minibatch_update(networks, config, states, actions, advantages, targets,
                      log_prob_old):
    policy = networks.policy
    value = networks.value
    m = len(states)

    log_prob_new = policy.log_prob(policy.params, states, actions)
    rho = np.exp(np.clip(log_prob_new - log_prob_old,
                         -RATIO_EXP_CLAMP, RATIO_EXP_CLAMP))
    coeff = clipped_gradient_coefficient(rho, advantages, config.clip) / m
    policy_grad = policy.log_prob_gradient(policy.params, states, actions, coeff)

    residual = targets - value.values(value.params, states)
    value_grad = value.value_gradient(value.params, states, -2.0 * residual / m)

    if not (np.all(np.isfinite(policy_grad)) and np.all(np.isfinite(value_grad))):
        raise NumericalError("non-finite gradient in minibatch update")
    adam.adam_step(networks.policy_adam, policy.params, policy_grad)
    adam.adam_step(networks.value_adam, value.params, value_grad)


class PpoAgent:
    """Agent facade for the interaction loop: act() samples the Gaussian
    policy, learn() runs ppo_learn and reports (rather than propagates)
    numerical failures."""

    def __init__(self, obs_dim, action_dim, config, policy_rng, shuffle_rng,
                 init_rng=None):
        self.config = config
        self.networks = PpoNetworks(obs_dim, action_dim, config.lr,
                                    init_rng if init_rng is not None else policy_rng)
        self.policy_rng = policy_rng
        self.shuffle_rng = shuffle_rng
        self.aborted_learn_calls = 0

    def act(self, obs):
        return self.networks.policy.sample(obs, self.policy_rng)

    def learn(self, buffer):
        try:
            ppo_learn(buffer, self.networks, self.config, self.shuffle_rng)
        except NumericalError as err:
            self.aborted_learn_calls += 1
            log.warning("learn call aborted: %s", err)
