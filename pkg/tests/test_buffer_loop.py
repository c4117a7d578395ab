import math

import numpy as np
import pytest

from cyclerl import envs
from cyclerl.agents import RandomAgent
from cyclerl.errors import ConfigurationError
from cyclerl.loop import (Buffer, InteractionConfig, accumulated_return,
                          run_interaction)


class RecordingEnv:
    """Wraps an env and keeps a per-env-step ledger for oracle checks."""

    def __init__(self, env):
        self._env = env
        self.config = env.config
        self.obs_dim = env.obs_dim
        self.action_dim = env.action_dim
        self.step_rewards = []
        self.step_actions = []
        self.step_terminals = []
        self.resets = 0

    def reset(self, rng):
        self.resets += 1
        return self._env.reset(rng)

    def step(self, action):
        result = self._env.step(action)
        self.step_rewards.append(result.reward)
        self.step_actions.append(np.array(action, copy=True))
        self.step_terminals.append(result.terminal)
        return result


class RecordingAgent:
    def __init__(self, action_dim, rng, learning_period=None):
        self.inner = RandomAgent(action_dim, rng)
        self.act_states = []
        self.learn_sizes = []

    def act(self, obs):
        self.act_states.append(np.array(obs, copy=True))
        return self.inner.act(obs)

    def learn(self, buffer):
        self.learn_sizes.append(len(buffer))


class TestBuffer:
    def test_ring_overwrites_oldest(self):
        buf = Buffer(3, 1, 1)
        for i in range(5):
            buf.append([i], [i], float(i), [i + 1], False)
        assert len(buf) == 3
        states, actions, rewards, next_states, terminals = buf.ordered()
        assert rewards.tolist() == [2.0, 3.0, 4.0]
        assert states[:, 0].tolist() == [2.0, 3.0, 4.0]

    def test_size_never_exceeds_capacity(self):
        buf = Buffer(2, 1, 1)
        assert len(buf) == 0
        buf.append([0], [0], 0.0, [1], False)
        assert len(buf) == 1
        for i in range(10):
            buf.append([i], [i], 0.0, [i], True)
            assert len(buf) == 2

    def test_getitem_in_order(self):
        buf = Buffer(2, 1, 1)
        for i in range(3):
            buf.append([i], [10 * i], float(i), [i], i == 2)
        assert buf[0].reward == 1.0
        assert buf[1].reward == 2.0
        assert buf[1].terminal
        with pytest.raises(IndexError):
            buf[2]

    def test_sample_uniform(self):
        buf = Buffer(8, 1, 1)
        for i in range(8):
            buf.append([i], [i], float(i), [i], False)
        rng = np.random.default_rng(0)
        _, _, rewards, _, _ = buf.sample(rng, 1000)
        counts = np.bincount(rewards.astype(int), minlength=8)
        assert counts.min() > 80   # roughly uniform


class TestInteractionConfig:
    def test_rejects_non_multiple(self):
        with pytest.raises(ConfigurationError):
            InteractionConfig(5, 2, 1, 1)

    def test_repeat_factor(self):
        assert InteractionConfig(8, 2, 1, 1).repeat_factor == 4


def run_with_ledger(env_name, dt_ms, total_steps, seed=0, learning_period=7):
    env = RecordingEnv(envs.make(env_name))
    agent = RecordingAgent(env.action_dim, np.random.default_rng(seed + 1))
    config = InteractionConfig(dt_ms, env.config.env_timestep_ms,
                               learning_period, buffer_capacity=total_steps + 1)
    summary = run_interaction(env, agent, config, total_steps,
                              np.random.default_rng(seed))
    return env, agent, config, summary


class TestInteractionLoop:
    def test_agent_acts_every_fourth_env_step(self):
        # 8ms cycle over a 2ms timestep: one action per four env steps
        env, agent, _, summary = run_with_ledger("reacher2d", 8, 4000)
        assert len(agent.act_states) == summary.agent_steps
        # reacher has no early termination, so the count is exact
        assert summary.agent_steps == 4000 // 4
        held = env.step_actions
        for i, a in enumerate(held):
            if i % 4 != 0:
                assert np.array_equal(a, held[i - 1])

    def test_repeat_factor_one_matches_plain_loop(self):
        env, agent, _, summary = run_with_ledger("reacher2d", 2, 500)
        assert summary.agent_steps == 500
        assert len(env.step_rewards) == 500

    def test_reward_conservation_per_transition(self):
        # each stored reward is exactly the sequential sum of its hold's
        # env-step rewards (bit-exact: the loop accumulated them in this
        # order), and episode returns chain those group sums
        for env_name, dt in (("reacher2d", 8), ("polebalance", 40)):
            env = RecordingEnv(envs.make(env_name))
            agent = RecordingAgent(env.action_dim, np.random.default_rng(3))
            config = InteractionConfig(dt, env.config.env_timestep_ms,
                                       learning_period=10**9,
                                       buffer_capacity=100_000)
            summary = run_interaction(env, agent, config, 30_000,
                                      np.random.default_rng(4))

            # rebuild the per-hold groups from the env-step ledger
            rf = config.repeat_factor
            groups = []
            acc = 0.0
            used = 0
            for reward, terminal in zip(env.step_rewards, env.step_terminals):
                acc += reward
                used += 1
                if used == rf or terminal:
                    groups.append(acc)
                    acc = 0.0
                    used = 0
            stored = summary.agent_steps
            assert len(groups) == stored
            stored_rewards = summary.buffer.ordered()[2]
            terminals = summary.buffer.ordered()[4]
            for k in range(stored):
                assert stored_rewards[k] == groups[k]   # bit-exact

            # episode returns equal the chained group sums, bit-exactly
            pos = 0
            for episode in summary.episodes:
                total = 0.0
                while pos < stored:
                    total += stored_rewards[pos]
                    pos += 1
                    if terminals[pos - 1]:
                        break
                assert episode.undiscounted_return == total

    def test_terminal_mid_hold_stores_early_and_resets_phase(self):
        env, agent, config, summary = run_with_ledger("polebalance", 40, 20_000,
                                                      seed=2)
        rf = config.repeat_factor
        # walk the env-step ledger and reproduce the loop's storage rule
        expected_agent_steps = 0
        j = 0
        for terminal in env.step_terminals:
            stored = (j + 1) % rf == 0 or terminal
            if stored:
                expected_agent_steps += 1
            j = 0 if terminal else j + 1
        assert summary.agent_steps == expected_agent_steps
        # ceil accounting per episode
        for episode in summary.episodes:
            env_steps = episode.env_step_at_end - (
                summary.episodes[episode.index - 1].env_step_at_end
                if episode.index else 0)
            assert episode.agent_steps == math.ceil(env_steps / rf)

    def test_learn_cadence(self):
        env, agent, config, summary = run_with_ledger("reacher2d", 8, 2000,
                                                      learning_period=7)
        assert summary.learn_calls == summary.agent_steps // 7
        assert summary.learn_calls == len(agent.learn_sizes)

    def test_one_step_episode(self):
        class OneStepEnv:
            obs_dim = 1
            action_dim = 1
            config = envs.EnvConfig(2, 2)

            def reset(self, rng):
                return np.zeros(1)

            def step(self, action):
                return envs.StepResult(1.5, np.ones(1), True)

        agent = RecordingAgent(1, np.random.default_rng(0))
        config = InteractionConfig(8, 2, 100, 10)
        summary = run_interaction(OneStepEnv(), agent, config, 5,
                                  np.random.default_rng(0))
        # every env step terminates: transition stored each step with the
        # single reward, and the phase resets so each step selects an action
        assert summary.agent_steps == 5
        assert len(agent.act_states) == 5
        assert all(e.undiscounted_return == 1.5 for e in summary.episodes)
        assert all(e.agent_steps == 1 for e in summary.episodes)

    def test_partial_final_episode_excluded(self):
        env, agent, _, summary = run_with_ledger("reacher2d", 8, 2500)
        # reacher episodes are 1200 env steps; 2500 steps = 2 complete + partial
        assert len(summary.episodes) == 2
        assert summary.episodes[-1].env_step_at_end == 2400

    def test_full_determinism(self):
        outs = []
        for _ in range(2):
            env = envs.make("polebalance")
            agent = RandomAgent(1, np.random.default_rng(11))
            config = InteractionConfig(8, 4, 3, 50)
            summary = run_interaction(env, agent, config, 5000,
                                      np.random.default_rng(12))
            outs.append([(e.env_step_at_end, e.undiscounted_return)
                         for e in summary.episodes])
        assert outs[0] == outs[1]

    def test_action_after_reset_uses_fresh_initial_state(self):
        class CountingEnv:
            obs_dim = 1
            action_dim = 1
            config = envs.EnvConfig(2, 2)

            def __init__(self):
                self.episode = -1
                self.inner_step = 0

            def reset(self, rng):
                self.episode += 1
                self.inner_step = 0
                return np.array([float(100 * self.episode)])

            def step(self, action):
                self.inner_step += 1
                terminal = self.inner_step == 3
                obs = np.array([100.0 * self.episode + self.inner_step])
                return envs.StepResult(0.0, obs, terminal)

        agent = RecordingAgent(1, np.random.default_rng(0))
        # repeat factor 2 over 3-step episodes: terminals land mid-hold
        config = InteractionConfig(4, 2, 10**9, 100)
        run_interaction(CountingEnv(), agent, config, 12, np.random.default_rng(0))
        seen = [s[0] for s in agent.act_states]
        # 3-step episodes under a 2-step hold: actions at phase 0 see the
        # latest state (the fresh reset obs right after a terminal, then the
        # post-hold state); 12 env steps cover four episodes
        assert seen == [0.0, 2.0, 100.0, 102.0, 200.0, 202.0, 300.0, 302.0]

    def test_out_of_range_agent_actions_are_clipped_for_env_but_stored_raw(self):
        class BigActionAgent(RecordingAgent):
            def act(self, obs):
                super().act(obs)
                return np.array([3.0, -2.0])

        env = RecordingEnv(envs.make("reacher2d"))
        agent = BigActionAgent(2, np.random.default_rng(0))
        config = InteractionConfig(8, 2, 10**9, 100)
        summary = run_interaction(env, agent, config, 40, np.random.default_rng(1))
        applied = np.array(env.step_actions)
        assert applied.min() >= -1.0 and applied.max() <= 1.0
        stored = summary.buffer.ordered()[1]
        assert np.all(stored == np.array([3.0, -2.0]))

    def test_mismatched_env_timestep_refused(self):
        env = envs.make("reacher2d")  # 2ms
        agent = RandomAgent(2, np.random.default_rng(0))
        with pytest.raises(ConfigurationError):
            run_interaction(env, agent, InteractionConfig(8, 4, 1, 1), 10,
                            np.random.default_rng(0))


class TestAccumulatedReturn:
    def test_empty(self):
        assert accumulated_return([]) == 0.0

    def test_small(self):
        assert accumulated_return([1.0, 2.0, 3.0]) == 6.0

    def test_matches_env_ledger(self):
        env, agent, _, summary = run_with_ledger("reacher2d", 16, 2400, seed=9)
        episode = summary.episodes[0]
        # the episode return equals the sequential env-step sum because the
        # loop accumulates exactly these group sums in order
        ledger_total = accumulated_return(env.step_rewards[:1200])
        assert episode.undiscounted_return == pytest.approx(ledger_total, abs=1e-12)
