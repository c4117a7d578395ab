"""Soft actor-critic with twin critics, automatic temperature and Polyak
target averaging.

The policy trunk (two relu layers of 256) is shared between the action mean
and log-std heads: the network simply emits 2*action_dim outputs. Critics
take the concatenated observation and action. Each learn call runs g
iterations of: critic updates toward the min-target with an entropy bonus,
a reparameterized actor update through the minimum online critic, a
temperature update on log(alpha) toward target entropy -|A|, and Polyak
updates of both target critics, in that order.

Random draws per learn iteration happen in a fixed order: minibatch indices
from the replay stream, then next-action noise, then reparameterization
noise from the policy stream.

Critics are only ever trained on and queried at actions inside the
environment's action box: the environment clips whatever it receives, so
Q(s, a) = Q(s, clip(a)) and the action gradient vanishes outside the box.
Without this projection the plain-Gaussian policy diverges: fresh policy
samples query the (relu) critics far outside the box, the critics
extrapolate linearly, and the actor chases unbounded action values.
"""

import logging
from dataclasses import dataclass

import numpy as np

from cyclerl.errors import ConfigurationError
from cyclerl.nn import adam, mlp
from cyclerl.nn.gaussian import LOG_2PI

log = logging.getLogger(__name__)

LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0
ACTION_BOUND = 1.0


@dataclass(frozen=True)
class SacConfig:
    replay_capacity: int = 1_000_000   # b
    minibatch_size: int = 256          # m
    gradient_steps: int = 1            # g
    discount: float = 0.99
    target_smoothing: float = 0.005    # tau
    policy_lr: float = 3e-4
    critic_lr: float = 3e-4
    temperature_lr: float = 3e-4
    warmup_steps: int = 1000
    initial_temperature: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.target_smoothing <= 1.0:
            raise ConfigurationError(
                f"target_smoothing must lie in (0, 1], got {self.target_smoothing}")
        if self.minibatch_size < 1 or self.gradient_steps < 1:
            raise ConfigurationError("minibatch_size and gradient_steps must be >= 1")
        if self.warmup_steps < 0:
            raise ConfigurationError("warmup_steps must be >= 0")


class SacNetworks:
    def __init__(self, obs_dim, action_dim, config, init_rng,
                 hidden=(256, 256), activation="relu"):
        self.obs_dim = obs_dim
        self.action_dim = action_dim
        self.policy_spec = mlp.MlpSpec(obs_dim, hidden, 2 * action_dim, activation)
        self.critic_spec = mlp.MlpSpec(obs_dim + action_dim, hidden, 1, activation)
        self.policy_params = mlp.init_params(self.policy_spec, init_rng)
        self.critic1_params = mlp.init_params(self.critic_spec, init_rng)
        self.critic2_params = mlp.init_params(self.critic_spec, init_rng)
        self.target1_params = self.critic1_params.copy()
        self.target2_params = self.critic2_params.copy()
        self.log_alpha = np.array([np.log(config.initial_temperature)])
        self.policy_adam = adam.AdamState(self.policy_params.size, lr=config.policy_lr)
        self.critic1_adam = adam.AdamState(self.critic1_params.size, lr=config.critic_lr)
        self.critic2_adam = adam.AdamState(self.critic2_params.size, lr=config.critic_lr)
        self.alpha_adam = adam.AdamState(1, lr=config.temperature_lr)

    @property
    def alpha(self):
        return float(np.exp(self.log_alpha[0]))

    def policy_heads(self, params, states):
        """(mean, clamped log-std, raw log-std) for a batch of states."""
        out = mlp.forward_batch(self.policy_spec, params, states)
        mean = out[:, :self.action_dim]
        raw_log_std = out[:, self.action_dim:]
        log_std = np.clip(raw_log_std, LOG_STD_MIN, LOG_STD_MAX)
        return mean, log_std, raw_log_std

    def critic_values(self, params, states, actions):
        x = np.concatenate([states, actions], axis=1)
        return mlp.forward_batch(self.critic_spec, params, x)[:, 0]


def critic_target(reward, terminal, target_q1, target_q2, next_log_prob,
                  gamma, alpha):
    """Bootstrap target R + (1-T)*gamma*(min(q1bar, q2bar) - alpha*logpi)."""
    not_terminal = 1.0 - np.asarray(terminal, dtype=np.float64)
    soft_value = np.minimum(target_q1, target_q2) - alpha * next_log_prob
    return np.asarray(reward, dtype=np.float64) + not_terminal * gamma * soft_value


def polyak_update(target_params, online_params, tau):
    """target <- tau*online + (1-tau)*target, elementwise in place."""
    target_params *= 1.0 - tau
    target_params += tau * online_params


def temperature_gradient(log_prob_f, target_entropy):
    """Per-sample d/d(alpha) of the temperature loss: -logpi - target."""
    return -np.asarray(log_prob_f, dtype=np.float64) - target_entropy


def actor_head_cotangents(sigma, eps, dq_da, alpha, m):
    """Cotangents (d_mean, d_sigma) of the actor loss mean over m samples.

    dq_da is the action gradient of the minimum critic at the
    reparameterized action; the alpha terms through the mean cancel exactly,
    leaving d_mean = -dq_da/m and d_sigma = -alpha/(m*sigma) - eps*dq_da/m.
    """
    d_mean = -dq_da / m
    d_sigma = -(alpha / m) / sigma - eps * dq_da / m
    return d_mean, d_sigma


def actor_loss(nets, policy_params, states, eps, alpha):
    """Mean over the batch of alpha*logpi(f|S) - min(q1, q2)(S, clip(f))
    with the reparameterized f = mean + eps*sigma. Used by gradient checks."""
    out = mlp.forward_batch(nets.policy_spec, policy_params, states)
    a_dim = nets.action_dim
    mean = out[:, :a_dim]
    log_std = np.clip(out[:, a_dim:], LOG_STD_MIN, LOG_STD_MAX)
    sigma = np.exp(log_std)
    f = np.clip(mean + eps * sigma, -ACTION_BOUND, ACTION_BOUND)
    log_prob = np.sum(-0.5 * eps * eps - log_std - 0.5 * LOG_2PI, axis=1)
    q1 = nets.critic_values(nets.critic1_params, states, f)
    q2 = nets.critic_values(nets.critic2_params, states, f)
    return float(np.mean(alpha * log_prob - np.minimum(q1, q2)))


def actor_policy_gradient(nets, states, eps, alpha):
    """Gradient of actor_loss w.r.t. the policy parameters: flows through
    the reparameterization into the log-prob and into the per-sample
    minimum online critic."""
    m, a_dim = eps.shape
    pol_acts = mlp.forward_cached(nets.policy_spec, nets.policy_params, states)
    out = pol_acts[-1]
    mean = out[:, :a_dim]
    raw_log_std = out[:, a_dim:]
    log_std = np.clip(raw_log_std, LOG_STD_MIN, LOG_STD_MAX)
    sigma = np.exp(log_std)
    f = mean + eps * sigma
    inside = (np.abs(f) <= ACTION_BOUND).astype(np.float64)
    xf = np.concatenate([states, np.clip(f, -ACTION_BOUND, ACTION_BOUND)], axis=1)
    acts1 = mlp.forward_cached(nets.critic_spec, nets.critic1_params, xf)
    acts2 = mlp.forward_cached(nets.critic_spec, nets.critic2_params, xf)
    q1 = acts1[-1][:, 0]
    q2 = acts2[-1][:, 0]
    use1 = (q1 <= q2).astype(np.float64)[:, None]
    _, gx1 = mlp.backward_batch(nets.critic_spec, nets.critic1_params, acts1,
                                use1, need_param_grad=False)
    _, gx2 = mlp.backward_batch(nets.critic_spec, nets.critic2_params, acts2,
                                1.0 - use1, need_param_grad=False)
    dq_da = (gx1 + gx2)[:, nets.obs_dim:] * inside
    d_mean, d_sigma = actor_head_cotangents(sigma, eps, dq_da, alpha, m)
    d_log_std = d_sigma * sigma
    d_log_std[(raw_log_std < LOG_STD_MIN) | (raw_log_std > LOG_STD_MAX)] = 0.0
    gy = np.concatenate([d_mean, d_log_std], axis=1)
    grad, _ = mlp.backward_batch(nets.policy_spec, nets.policy_params,
                                 pol_acts, gy)
    return grad


class SacAgent:
    """Agent facade for the interaction loop. Acts uniformly at random for
    the first warmup_steps agent steps; learning is a no-op until the replay
    holds max(minibatch, warmup) transitions."""

    def __init__(self, obs_dim, action_dim, config, policy_rng, replay_rng,
                 init_rng=None):
        self.config = config
        self.networks = SacNetworks(obs_dim, action_dim, config,
                                    init_rng if init_rng is not None else policy_rng)
        self.policy_rng = policy_rng
        self.replay_rng = replay_rng
        self.target_entropy = -float(action_dim)
        self.steps_acted = 0

    def act(self, obs):
        # returns the clipped action actually applied, so the stored
        # transition matches what the environment received
        nets = self.networks
        if self.steps_acted < self.config.warmup_steps:
            self.steps_acted += 1
            return self.policy_rng.uniform(-1.0, 1.0, size=nets.action_dim)
        self.steps_acted += 1
        mean, log_std, _ = nets.policy_heads(nets.policy_params, obs[None, :])
        noise = self.policy_rng.standard_normal(nets.action_dim)
        raw = mean[0] + noise * np.exp(log_std[0])
        return np.clip(raw, -ACTION_BOUND, ACTION_BOUND)

    def learn(self, buffer):
        cfg = self.config
        if len(buffer) < max(cfg.minibatch_size, cfg.warmup_steps):
            return
        for _ in range(cfg.gradient_steps):
            self._gradient_step(buffer)

    # ---- one iteration of Alg-style updates ----

    def _gradient_step(self, buffer):
        cfg = self.config
        nets = self.networks
        m = cfg.minibatch_size
        a_dim = nets.action_dim
        states, actions, rewards, next_states, terminals = buffer.sample(
            self.replay_rng, m)

        # critic update: one shared next-action sample feeds both targets;
        # the critic input is projected onto the action box, the log-prob
        # stays that of the raw Gaussian draw
        mean2, log_std2, _ = nets.policy_heads(nets.policy_params, next_states)
        sigma2 = np.exp(log_std2)
        noise2 = self.policy_rng.standard_normal((m, a_dim))
        next_actions = np.clip(mean2 + noise2 * sigma2, -ACTION_BOUND, ACTION_BOUND)
        next_log_prob = np.sum(-0.5 * noise2 * noise2 - log_std2 - 0.5 * LOG_2PI,
                               axis=1)
        q1_t = nets.critic_values(nets.target1_params, next_states, next_actions)
        q2_t = nets.critic_values(nets.target2_params, next_states, next_actions)
        y = critic_target(rewards, terminals, q1_t, q2_t, next_log_prob,
                          cfg.discount, nets.alpha)
        keep = np.isfinite(y)
        if not np.all(keep):
            log.warning("skipping %d transitions with non-finite critic targets",
                        int(np.sum(~keep)))
            states, actions, y = states[keep], actions[keep], y[keep]
            next_states, terminals = next_states[keep], terminals[keep]
        m_eff = len(y)
        if m_eff == 0:
            return
        x = np.concatenate([states, actions], axis=1)
        for params, adam_state in ((nets.critic1_params, nets.critic1_adam),
                                   (nets.critic2_params, nets.critic2_adam)):
            acts = mlp.forward_cached(nets.critic_spec, params, x)
            q = acts[-1][:, 0]
            cot = ((q - y) / m_eff)[:, None]
            grad, _ = mlp.backward_batch(nets.critic_spec, params, acts, cot)
            adam.adam_step(adam_state, params, grad)

        # actor update through the per-sample minimum online critic
        eps = self.policy_rng.standard_normal((m_eff, a_dim))
        policy_grad = actor_policy_gradient(nets, states, eps, nets.alpha)
        adam.adam_step(nets.policy_adam, nets.policy_params, policy_grad)

        # temperature update re-evaluates f with the fresh policy, same noise
        _, log_std_new, _ = nets.policy_heads(nets.policy_params, states)
        log_prob_f = np.sum(-0.5 * eps * eps - log_std_new - 0.5 * LOG_2PI, axis=1)
        d_alpha = float(np.mean(temperature_gradient(log_prob_f, self.target_entropy)))
        grad_log_alpha = np.array([nets.alpha * d_alpha])
        adam.adam_step(nets.alpha_adam, nets.log_alpha, grad_log_alpha)

        polyak_update(nets.target1_params, nets.critic1_params, cfg.target_smoothing)
        polyak_update(nets.target2_params, nets.critic2_params, cfg.target_smoothing)
