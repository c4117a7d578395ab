"""Agent-environment interaction at an action-cycle time that is an integer
multiple of the environment timestep.

The agent picks an action every `repeat_factor` env steps; the action is held
(re-applied) in between while rewards accumulate into the pending transition.
A transition is stored right before the next action selection, or immediately
when the environment terminates mid-hold. Learning runs every U stored
transitions.
"""

from dataclasses import dataclass, field

import numpy as np

from cyclerl.errors import ConfigurationError


@dataclass(frozen=True)
class InteractionConfig:
    action_cycle_ms: int
    env_timestep_ms: int
    learning_period: int   # U, agent steps per learn call
    buffer_capacity: int   # b

    def __post_init__(self):
        if self.env_timestep_ms <= 0 or self.action_cycle_ms <= 0:
            raise ConfigurationError("cycle time and env timestep must be positive")
        if self.action_cycle_ms % self.env_timestep_ms != 0:
            raise ConfigurationError(
                f"action cycle {self.action_cycle_ms}ms is not an integer multiple "
                f"of the env timestep {self.env_timestep_ms}ms")
        if self.learning_period < 1 or self.buffer_capacity < 1:
            raise ConfigurationError("learning_period and buffer_capacity must be >= 1")

    @property
    def repeat_factor(self):
        return self.action_cycle_ms // self.env_timestep_ms


@dataclass
class Transition:
    """One agent-step record: the held action, the reward summed over the
    env steps it was held for, and the state observed after the hold."""

    state: np.ndarray
    action: np.ndarray
    reward: float
    next_state: np.ndarray
    terminal: bool


class Buffer:
    """Bounded transition store; once full, the oldest entry is overwritten."""

    def __init__(self, capacity, obs_dim, action_dim):
        if capacity < 1:
            raise ConfigurationError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.states = np.zeros((capacity, obs_dim))
        self.actions = np.zeros((capacity, action_dim))
        self.rewards = np.zeros(capacity)
        self.next_states = np.zeros((capacity, obs_dim))
        self.terminals = np.zeros(capacity, dtype=bool)
        self.write_cursor = 0
        self._size = 0

    def __len__(self):
        return self._size

    def append(self, state, action, reward, next_state, terminal):
        i = self.write_cursor
        self.states[i] = state
        self.actions[i] = action
        self.rewards[i] = reward
        self.next_states[i] = next_state
        self.terminals[i] = terminal
        self.write_cursor = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def _ordered_indices(self):
        if self._size < self.capacity:
            return np.arange(self._size)
        c = self.write_cursor
        return np.concatenate([np.arange(c, self.capacity), np.arange(c)])

    def ordered(self):
        """Column arrays for all stored transitions, oldest to newest."""
        idx = self._ordered_indices()
        return (self.states[idx], self.actions[idx], self.rewards[idx],
                self.next_states[idx], self.terminals[idx])

    def sample(self, rng, m):
        """Uniform random minibatch of m transitions (with replacement)."""
        idx = rng.integers(0, self._size, size=m)
        return (self.states[idx], self.actions[idx], self.rewards[idx],
                self.next_states[idx], self.terminals[idx])

    def __getitem__(self, i):
        """i-th transition in oldest-to-newest order."""
        if not 0 <= i < self._size:
            raise IndexError(i)
        j = self._ordered_indices()[i]
        return Transition(self.states[j].copy(), self.actions[j].copy(),
                          float(self.rewards[j]), self.next_states[j].copy(),
                          bool(self.terminals[j]))


@dataclass
class EpisodeRecord:
    index: int
    undiscounted_return: float
    env_step_at_end: int     # 1-based env-step count when the episode ended
    agent_steps: int


@dataclass
class RunSummary:
    episodes: list = field(default_factory=list)
    env_steps: int = 0
    agent_steps: int = 0
    learn_calls: int = 0
    buffer: Buffer = None


def accumulated_return(rewards):
    """Undiscounted return: the sequential sum of an episode's agent-step
    rewards (same accumulation order as the loop itself)."""
    total = 0.0
    for r in rewards:
        total += float(r)
    return total


def run_interaction(env, agent, config, total_env_steps, env_rng):
    """Run the cycle-time loop for exactly total_env_steps environment steps.

    The agent must expose act(observation) -> action and learn(buffer).
    The stored transition keeps the action exactly as the agent returned it
    (likelihood computations stay consistent with the sampling
    distribution); the copy applied to the environment is clipped to
    [-1, 1]. Agents whose contract is to store the applied action clip
    inside act(). The final, possibly partial episode is excluded from the
    returned episode records (its transitions still feed learning).
    """
    if total_env_steps < 1:
        raise ConfigurationError("total_env_steps must be >= 1")
    if env.config.env_timestep_ms != config.env_timestep_ms:
        raise ConfigurationError(
            f"config env timestep {config.env_timestep_ms}ms does not match the "
            f"environment's {env.config.env_timestep_ms}ms")

    rf = config.repeat_factor
    buffer = Buffer(config.buffer_capacity, env.obs_dim, env.action_dim)
    summary = RunSummary()

    obs = env.reset(env_rng)
    j = 0   # env steps since episode start
    k = 0   # agent steps
    held_action = None
    applied_action = None
    held_state = None
    held_reward = 0.0
    episode_return = 0.0
    episode_agent_steps = 0
    episode_index = 0

    for i in range(total_env_steps):
        if j % rf == 0:
            held_state = obs
            held_reward = 0.0
            held_action = np.asarray(agent.act(obs), dtype=np.float64)
            applied_action = np.clip(held_action, -1.0, 1.0)
        result = env.step(applied_action)
        held_reward += result.reward
        if (j + 1) % rf == 0 or result.terminal:
            buffer.append(held_state, held_action, held_reward,
                          result.next_observation, result.terminal)
            episode_return += held_reward
            episode_agent_steps += 1
            if (k + 1) % config.learning_period == 0:
                agent.learn(buffer)
                summary.learn_calls += 1
            k += 1
        j += 1
        if result.terminal:
            summary.episodes.append(EpisodeRecord(
                index=episode_index,
                undiscounted_return=episode_return,
                env_step_at_end=i + 1,
                agent_steps=episode_agent_steps,
            ))
            episode_index += 1
            episode_return = 0.0
            episode_agent_steps = 0
            obs = env.reset(env_rng)
            j = 0
        else:
            obs = result.next_observation

    summary.env_steps = total_env_steps
    summary.agent_steps = k
    summary.buffer = buffer
    return summary
