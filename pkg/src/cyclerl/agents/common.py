"""Pieces shared by the PPO and one-step actor-critic agents: a Gaussian
policy with a state-independent log-std head, and a scalar value network."""

import numpy as np

from cyclerl.nn import gaussian, mlp


class GaussianMlpPolicy:
    """Action mean from an MLP; log-std is a learned vector appended to the
    same flat parameter vector so one optimizer tracks both."""

    def __init__(self, obs_dim, action_dim, hidden, activation, rng):
        self.spec = mlp.MlpSpec(obs_dim, hidden, action_dim, activation)
        self.action_dim = action_dim
        self.params = mlp.init_params(self.spec, rng, extra=action_dim)

    def split(self, params):
        n = self.spec.param_count
        return params[:n], params[n:]

    def mean_std(self, params, states):
        trunk, log_std = self.split(params)
        mean = mlp.forward_batch(self.spec, trunk, states)
        return mean, np.exp(log_std)

    def sample(self, obs, rng):
        mean, std = self.mean_std(self.params, obs[None, :])
        return mean[0] + std * rng.standard_normal(self.action_dim)

    def log_prob(self, params, states, actions):
        mean, std = self.mean_std(params, states)
        return gaussian.log_prob_batch(mean, std, actions)

    def log_prob_gradient(self, params, states, actions, coeff):
        """sum_t coeff_t * grad_params log pi(action_t | state_t), flat."""
        trunk, log_std = self.split(params)
        acts = mlp.forward_cached(self.spec, trunk, states)
        mean = acts[-1]
        std = np.exp(log_std)
        z = (actions - mean) / std
        coeff = coeff[:, None]
        # d log pi / d mean = z / std; d log pi / d log_std = z^2 - 1
        gtrunk, _ = mlp.backward_batch(self.spec, trunk, acts, coeff * z / std)
        ghead = np.sum(coeff * (z * z - 1.0), axis=0)
        return np.concatenate([gtrunk, ghead])


class ValueMlp:
    """Scalar state-value network."""

    def __init__(self, obs_dim, hidden, activation, rng):
        self.spec = mlp.MlpSpec(obs_dim, hidden, 1, activation)
        self.params = mlp.init_params(self.spec, rng)

    def values(self, params, states):
        return mlp.forward_batch(self.spec, params, states)[:, 0]

    def value_gradient(self, params, states, coeff):
        """sum_t coeff_t * grad_params v(state_t), flat."""
        acts = mlp.forward_cached(self.spec, params, states)
        gparams, _ = mlp.backward_batch(self.spec, params, acts, coeff[:, None])
        return gparams


class RandomAgent:
    """Uniform random actions in [-1, 1]; learning is a no-op. Serves as the
    measurement baseline for learning checks."""

    def __init__(self, action_dim, rng):
        self.action_dim = action_dim
        self.rng = rng

    def act(self, obs):
        return self.rng.uniform(-1.0, 1.0, size=self.action_dim)

    def learn(self, buffer):
        pass
