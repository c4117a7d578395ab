import math

import numpy as np
import pytest

from cyclerl.agents import ppo
from cyclerl.errors import ConfigurationError, UsageError
from cyclerl.loop import Buffer
from cyclerl.nn import mlp


def closed_form_lambda_returns(rewards, states_chain, next_values_fn, gamma,
                               lam, terminal_end, tail_value):
    """Brute-force double-sum evaluation of the per-step targets.

    states_chain[t] is the state of transition t; within the segment,
    state t+1 equals next_state t. For a segment cut mid-episode
    (terminal_end=False), the Monte-Carlo head carries gamma^(L-t) *
    tail_value, where tail_value is the frozen value at the last next-state.
    """
    L = len(rewards)
    out = np.empty(L)
    for t in range(L):
        horizon = L - t - 1   # number of n-step terms
        # n-step returns G_{t:t+n} for n = 1..horizon
        acc = 0.0
        for n in range(1, horizon + 1):
            # n-step return: rewards R_{t+1}..R_{t+n} plus bootstrap at t+n
            g_n = sum(gamma ** j * rewards[t + j] for j in range(0, n))
            g_n += gamma ** n * next_values_fn(states_chain[t + n])
            acc += lam ** (n - 1) * g_n
        mc = sum(gamma ** (j - t) * rewards[j] for j in range(t, L))
        if not terminal_end:
            mc += gamma ** (L - t) * tail_value
        out[t] = lam ** horizon * mc + (1.0 - lam) * acc
    return out


class TestLambdaReturns:
    def make_episode(self, rng, length, obs_dim=3):
        states = rng.normal(size=(length + 1, obs_dim))
        rewards = rng.normal(size=length)
        return states, rewards

    def run_both(self, rng, length, gamma, lam, terminal_end=True):
        states, rewards = self.make_episode(rng, length)
        value_w = rng.normal(size=obs_w_size())
        spec = value_spec()

        def value_fn(batch):
            return mlp.forward_batch(spec, value_w, batch)[:, 0]

        next_states = states[1:]
        terminals = np.zeros(length, dtype=bool)
        if terminal_end:
            terminals[-1] = True
        got = ppo.lambda_returns(rewards, next_states, terminals, value_fn,
                                 gamma, lam)
        expected = closed_form_lambda_returns(
            rewards, states, lambda s: value_fn(s[None, :])[0], gamma, lam,
            terminal_end, value_fn(states[-1][None, :])[0])
        return got, expected

    @pytest.mark.parametrize("gamma", [0.0, 0.5, 0.9, 1.0])
    @pytest.mark.parametrize("lam", [0.0, 0.5, 0.8, 0.95, 1.0])
    def test_recursion_matches_double_sum(self, gamma, lam):
        rng = np.random.default_rng(int(gamma * 10 + lam * 100))
        for _ in range(4):
            length = int(rng.integers(1, 51))
            got, expected = self.run_both(rng, length, gamma, lam)
            np.testing.assert_allclose(got, expected, rtol=0, atol=1e-10)

    def test_cut_segment_bootstraps_from_last_next_state(self):
        rng = np.random.default_rng(7)
        got, expected = self.run_both(rng, 9, 0.9, 0.8, terminal_end=False)
        np.testing.assert_allclose(got, expected, rtol=0, atol=1e-10)

    def test_lambda_zero_is_one_step_target(self):
        rng = np.random.default_rng(1)
        rewards = rng.normal(size=5)
        next_states = rng.normal(size=(5, 2))
        terminals = np.array([False, False, False, False, True])

        def value_fn(batch):
            return batch[:, 0] * 2.0   # arbitrary deterministic stand-in

        got = ppo.lambda_returns(rewards, next_states, terminals, value_fn,
                                 0.9, 0.0)
        expected = rewards + 0.9 * np.where(terminals, 0.0, 2.0 * next_states[:, 0])
        np.testing.assert_allclose(got, expected, atol=1e-12)

    def test_gamma_zero_returns_rewards(self):
        rewards = np.array([1.0, -2.0, 0.5])
        next_states = np.zeros((3, 1))
        terminals = np.array([False, False, True])
        got = ppo.lambda_returns(rewards, next_states, terminals,
                                 lambda s: np.ones(len(s)), 0.0, 0.7)
        np.testing.assert_array_equal(got, rewards)

    def test_multi_episode_batch_respects_boundaries(self):
        # two episodes back to back; the second must not leak into the first
        rewards = np.array([1.0, 2.0, 3.0, 4.0])
        next_states = np.zeros((4, 1))
        terminals = np.array([False, True, False, True])
        got = ppo.lambda_returns(rewards, next_states, terminals,
                                 lambda s: np.full(len(s), 100.0), 1.0, 1.0)
        np.testing.assert_allclose(got, [3.0, 2.0, 7.0, 4.0], atol=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(UsageError):
            ppo.lambda_returns(np.zeros(0), np.zeros((0, 1)), np.zeros(0, bool),
                               lambda s: np.zeros(len(s)), 0.9, 0.9)


def value_spec():
    return mlp.MlpSpec(3, (4,), 1, "tanh")


def obs_w_size():
    return value_spec().param_count


class TestNormalizeAdvantages:
    def test_constant_input_gives_zeros(self):
        out = ppo.normalize_advantages(np.full(6, 3.7))
        np.testing.assert_array_equal(out, np.zeros(6))

    def test_two_point_case(self):
        np.testing.assert_allclose(ppo.normalize_advantages(np.array([0.0, 2.0])),
                                   [-1.0, 1.0], atol=1e-7)

    def test_output_statistics(self):
        rng = np.random.default_rng(3)
        out = ppo.normalize_advantages(rng.normal(size=257) * 13 + 5)
        assert abs(out.mean()) < 1e-12
        assert abs(out.std() - 1.0) < 1e-6

    def test_single_element_guard(self):
        np.testing.assert_array_equal(ppo.normalize_advantages(np.array([9.9])),
                                      np.zeros(1))


class TestClippedCoefficient:
    def test_ratio_one_is_active(self):
        c = ppo.clipped_gradient_coefficient(1.0, 0.8, 0.2)
        assert c == pytest.approx(-0.8)

    def test_positive_advantage_far_ratio_is_zero(self):
        eps = 0.2
        c = ppo.clipped_gradient_coefficient(1.0 + 2 * eps, 1.0, eps)
        assert c == 0.0

    def test_zero_branch_condition(self):
        rng = np.random.default_rng(4)
        for _ in range(2000):
            rho = float(rng.uniform(0.0, 3.0))
            h = float(rng.normal())
            eps = float(rng.uniform(0.05, 0.5))
            c = ppo.clipped_gradient_coefficient(rho, h, eps)
            zero_branch = (rho * h > np.clip(rho, 1 - eps, 1 + eps) * h) and not (
                1 - eps <= rho <= 1 + eps)
            assert (c == 0.0 and h != 0.0) == zero_branch or h == 0.0

    def test_matches_subgradient_of_min_surrogate(self):
        # parameterize rho = exp(s); L(s) = -min(rho*h, clip(rho)*h); away
        # from ties, dL/ds equals the returned coefficient
        rng = np.random.default_rng(5)
        checked = 0
        for _ in range(500):
            rho = float(rng.uniform(0.2, 2.5))
            h = float(rng.normal())
            eps = float(rng.uniform(0.05, 0.5))
            if abs(rho - (1 - eps)) < 1e-3 or abs(rho - (1 + eps)) < 1e-3 or abs(h) < 1e-3:
                continue   # tie / kink neighborhoods
            s = math.log(rho)
            d = 1e-7

            def loss(sv):
                r = math.exp(sv)
                return -min(r * h, min(max(r, 1 - eps), 1 + eps) * h)

            fd = (loss(s + d) - loss(s - d)) / (2 * d)
            c = ppo.clipped_gradient_coefficient(rho, h, eps)
            assert c == pytest.approx(fd, rel=1e-4, abs=1e-6)
            checked += 1
        assert checked > 300


def tiny_networks(seed=0):
    rng = np.random.default_rng(seed)
    return ppo.PpoNetworks(obs_dim=1, action_dim=1, lr=0.05, init_rng=rng,
                           hidden=(), activation="tanh")


def fill_buffer(transitions):
    buf = Buffer(len(transitions), 1, 1)
    for s, a, r, s2, t in transitions:
        buf.append([s], [a], r, [s2], t)
    return buf


class TestPpoLearn:
    def test_zero_epochs_changes_nothing(self):
        nets = tiny_networks()
        before_p = nets.policy.params.copy()
        before_v = nets.value.params.copy()
        cfg = ppo.PpoConfig(batch_size=4, minibatch_size=2, epochs=0, clip=0.2,
                            discount=0.9, trace_decay=0.5, lr=0.05)
        buf = fill_buffer([(0.1, 0.2, 1.0, 0.3, False),
                           (0.3, -0.1, 0.5, 0.5, True),
                           (0.2, 0.4, -0.5, 0.1, False),
                           (0.1, 0.0, 0.25, 0.0, True)])
        ppo.ppo_learn(buf, nets, cfg, np.random.default_rng(0))
        np.testing.assert_array_equal(nets.policy.params, before_p)
        np.testing.assert_array_equal(nets.value.params, before_v)

    def test_wrong_buffer_size_rejected(self):
        nets = tiny_networks()
        cfg = ppo.PpoConfig(batch_size=4, minibatch_size=2)
        buf = fill_buffer([(0.0, 0.0, 1.0, 0.0, True)])
        with pytest.raises(UsageError):
            ppo.ppo_learn(buf, nets, cfg, np.random.default_rng(0))

    def test_zero_advantages_freeze_policy_but_not_value(self):
        # all transitions terminal with equal rewards and a zero-init value
        # net: raw advantages are constant, so normalized advantages vanish
        nets = tiny_networks()
        nets.value.params[:] = 0.0
        before_p = nets.policy.params.copy()
        before_v = nets.value.params.copy()
        cfg = ppo.PpoConfig(batch_size=4, minibatch_size=4, epochs=1, clip=0.2,
                            discount=0.9, trace_decay=0.5, lr=0.05)
        buf = fill_buffer([(0.5, 0.1, 2.0, 0.0, True),
                           (-0.5, 0.2, 2.0, 0.0, True),
                           (0.25, -0.3, 2.0, 0.0, True),
                           (-0.25, 0.0, 2.0, 0.0, True)])
        ppo.ppo_learn(buf, nets, cfg, np.random.default_rng(0))
        np.testing.assert_array_equal(nets.policy.params, before_p)
        v_before = 0.0
        v_after = nets.value.values(nets.value.params, np.array([[0.5]]))[0]
        assert abs(v_after - 2.0) < abs(v_before - 2.0)

    def test_optimizer_step_count(self):
        nets = tiny_networks(seed=3)
        cfg = ppo.PpoConfig(batch_size=5, minibatch_size=2, epochs=3, clip=0.2,
                            discount=0.9, trace_decay=0.5, lr=0.01)
        buf = fill_buffer([(0.1 * i, 0.05 * i, float(i), 0.1 * i + 0.1, i == 4)
                           for i in range(5)])
        ppo.ppo_learn(buf, nets, cfg, np.random.default_rng(1))
        expected = 3 * math.ceil(5 / 2)
        assert nets.policy_adam.step_count == expected
        assert nets.value_adam.step_count == expected

    def test_first_minibatch_has_unit_ratio(self, monkeypatch):
        nets = tiny_networks(seed=4)
        cfg = ppo.PpoConfig(batch_size=6, minibatch_size=3, epochs=2, clip=0.2,
                            discount=0.9, trace_decay=0.5, lr=0.05)
        buf = fill_buffer([(0.1 * i, 0.05 - 0.02 * i, float(i) / 3, 0.1 * i, i == 5)
                           for i in range(6)])
        seen = []
        original = ppo.clipped_gradient_coefficient

        def spy(rho, advantage, clip):
            seen.append(np.atleast_1d(np.asarray(rho, dtype=float)).copy())
            return original(rho, advantage, clip)

        monkeypatch.setattr(ppo, "clipped_gradient_coefficient", spy)
        ppo.ppo_learn(buf, nets, cfg, np.random.default_rng(2))
        assert len(seen) == 2 * 2
        np.testing.assert_allclose(seen[0], 1.0, rtol=0, atol=1e-12)

    def test_scripted_trace_matches_independent_arithmetic(self):
        # b=4, one epoch, m=2, fixed shuffle; linear policy/value on scalars.
        # The reference below re-implements the learn step with plain float
        # arithmetic and its own Adam recurrence.
        nets = tiny_networks(seed=9)
        w_p, b_p = nets.policy.params[0], nets.policy.params[1]
        ls = nets.policy.params[2]
        w_v, b_v = nets.value.params[0], nets.value.params[1]
        gamma, lam, eps, lr = 0.9, 0.8, 0.2, 0.05
        data = [(0.5, 0.3, 1.0, 0.2, False),
                (0.2, -0.4, 0.5, -0.1, False),
                (-0.1, 0.2, -0.25, 0.4, True),
                (0.4, 0.1, 2.0, -0.3, False)]
        cfg = ppo.PpoConfig(batch_size=4, minibatch_size=2, epochs=1,
                            clip=eps, discount=gamma, trace_decay=lam, lr=lr)
        shuffle_seed = 123
        perm = np.random.default_rng(shuffle_seed).permutation(4)

        # ---- independent scalar reference ----
        def vhat(s, wv=None, bv=None):
            wv = w_v if wv is None else wv
            bv = b_v if bv is None else bv
            return wv * s + bv

        states = [d[0] for d in data]
        actions = [d[1] for d in data]
        rewards = [d[2] for d in data]
        nxt = [d[3] for d in data]
        terms = [d[4] for d in data]

        targets = [0.0] * 4
        tail = vhat(nxt[3])
        for t in (3, 2, 1, 0):
            if terms[t]:
                tail = rewards[t]
            else:
                tail = rewards[t] + gamma * ((1 - lam) * vhat(nxt[t]) + lam * tail)
            targets[t] = tail
        raw = [targets[t] - vhat(states[t]) for t in range(4)]
        mean_raw = sum(raw) / 4
        std_raw = math.sqrt(sum((x - mean_raw) ** 2 for x in raw) / 4)
        adv = [(x - mean_raw) / (std_raw + 1e-8) for x in raw]

        sigma = math.exp(ls)

        def logpi(s, a, wp, bp, lsv):
            mu = wp * s + bp
            sg = math.exp(lsv)
            return -((a - mu) ** 2) / (2 * sg * sg) - lsv - 0.5 * math.log(2 * math.pi)

        logp_old = [logpi(states[t], actions[t], w_p, b_p, ls) for t in range(4)]

        class ScalarAdam:
            def __init__(self, n):
                self.m = [0.0] * n
                self.v = [0.0] * n
                self.t = 0

            def step(self, params, grads):
                self.t += 1
                out = []
                for i, (p, g) in enumerate(zip(params, grads)):
                    self.m[i] = 0.9 * self.m[i] + 0.1 * g
                    self.v[i] = 0.999 * self.v[i] + 0.001 * g * g
                    mh = self.m[i] / (1 - 0.9 ** self.t)
                    vh = self.v[i] / (1 - 0.999 ** self.t)
                    out.append(p - lr * mh / (math.sqrt(vh) + 1e-8))
                return out

        pol_adam = ScalarAdam(3)
        val_adam = ScalarAdam(2)
        pol = [w_p, b_p, ls]
        val = [w_v, b_v]
        for half in (perm[:2], perm[2:]):
            gp = [0.0, 0.0, 0.0]
            gv = [0.0, 0.0]
            for t in half:
                lp_new = logpi(states[t], actions[t], pol[0], pol[1], pol[2])
                rho = math.exp(max(-20.0, min(20.0, lp_new - logp_old[t])))
                unclipped = rho * adv[t]
                clipped = max(1 - eps, min(1 + eps, rho)) * adv[t]
                active = unclipped <= clipped or (1 - eps <= rho <= 1 + eps)
                c = -unclipped if active else 0.0
                mu = pol[0] * states[t] + pol[1]
                sg = math.exp(pol[2])
                z = (actions[t] - mu) / sg
                gp[0] += c * (z / sg) * states[t] / 2
                gp[1] += c * (z / sg) / 2
                gp[2] += c * (z * z - 1) / 2
                resid = targets[t] - (val[0] * states[t] + val[1])
                gv[0] += -2 * resid * states[t] / 2
                gv[1] += -2 * resid / 2
            pol = pol_adam.step(pol, gp)
            val = val_adam.step(val, gv)

        # ---- library path with the same shuffle stream ----
        buf = fill_buffer(data)
        ppo.ppo_learn(buf, nets, cfg, np.random.default_rng(shuffle_seed))
        np.testing.assert_allclose(nets.policy.params, pol, rtol=0, atol=1e-12)
        np.testing.assert_allclose(nets.value.params, val, rtol=0, atol=1e-12)


class TestConfigValidation:
    def test_minibatch_bounds(self):
        with pytest.raises(ConfigurationError):
            ppo.PpoConfig(batch_size=4, minibatch_size=5)

    def test_clip_range(self):
        with pytest.raises(ConfigurationError):
            ppo.PpoConfig(batch_size=4, minibatch_size=2, clip=1.0)
