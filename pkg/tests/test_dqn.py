import numpy as np
import pytest

from cachegym.dqn import DqnAgent
from cachegym.trace_gen import PopularityModel, generate_static_trace
from cachegym.cache_core import run_policy
from cachegym.wolpertinger import AgentConfig, Transition


def make_config(**kw):
    defaults = dict(capacity=5, seed=0, buffer_capacity=500, batch_size=20, long_horizon=10)
    defaults.update(kw)
    return AgentConfig(**defaults)


def fill_buffer(agent, count, rng):
    config = agent.config
    for _ in range(count):
        agent.buffer.push(
            Transition(
                rng.random(config.state_size),
                int(rng.integers(0, config.capacity + 1)),
                float(rng.random()),
                rng.random(config.state_size),
            )
        )


class TestSelect:
    def test_output_width(self):
        agent = DqnAgent(make_config())
        assert agent.net.output_size == 6

    def test_zero_net_ties_to_action_zero(self):
        agent = DqnAgent(make_config())
        for w in agent.net.weights:
            w[:] = 0
        action, evals = agent.greedy_action(np.ones(agent.config.state_size))
        assert action == 0
        assert evals == 6

    def test_hand_set_weights_select_target_unit(self):
        agent = DqnAgent(make_config())
        for w in agent.net.weights:
            w[:] = 0
        agent.net.biases[-1][:] = 0
        agent.net.biases[-1][4] = 1.0
        action, _ = agent.greedy_action(np.zeros(agent.config.state_size))
        assert action == 4

    def test_evaluation_count_at_large_scale(self):
        agent = DqnAgent(AgentConfig(capacity=300))
        agent.frozen_greedy = True
        _, evals = agent.select_action(np.zeros(agent.config.state_size))
        assert evals == 301

    def test_greedy_equals_brute_force_argmax(self):
        agent = DqnAgent(make_config())
        rng = np.random.default_rng(2)
        for _ in range(200):
            s = rng.random(agent.config.state_size)
            action, _ = agent.greedy_action(s)
            q = agent.q_values(s)
            brute = min(range(6), key=lambda a: (-q[a], a))
            assert action == brute


class TestTrain:
    def test_insufficient_buffer_noop(self):
        agent = DqnAgent(make_config())
        assert agent.train_batch() is False

    def test_gamma_near_zero_targets_equal_rewards(self):
        config = make_config(gamma=1e-12)
        agent = DqnAgent(config)
        rng = np.random.default_rng(1)
        fill_buffer(agent, 40, rng)
        batch = agent.buffer.sample(config.batch_size)
        next_q, _ = agent.target.forward(np.stack([t.next_state for t in batch]))
        targets = np.array([t.reward for t in batch]) + config.gamma * next_q.max(axis=1)
        assert targets == pytest.approx([t.reward for t in batch], abs=1e-9)

    def test_loss_decreases_on_repeated_transition(self):
        config = make_config(batch_size=10)
        agent = DqnAgent(config)
        rng = np.random.default_rng(3)
        s, s2 = rng.random(config.state_size), rng.random(config.state_size)
        for _ in range(20):
            agent.buffer.push(Transition(s, 2, 1.0, s2))

        def loss():
            next_q, _ = agent.target.forward(s2)
            y = 1.0 + config.gamma * next_q.max()
            return (agent.q_values(s)[2] - y) ** 2

        before = loss()
        for _ in range(5):
            agent.train_batch()
        assert loss() < before

    def test_untaken_action_gradient_is_zero(self):
        config = make_config(batch_size=5, tau=1e-12)
        agent = DqnAgent(config)
        rng = np.random.default_rng(4)
        s, s2 = rng.random(config.state_size), rng.random(config.state_size)
        for _ in range(10):
            agent.buffer.push(Transition(s, 2, 1.0, s2))
        # only the taken action's output weights may change
        before = agent.net.weights[-1].copy()
        before_bias = agent.net.biases[-1].copy()
        agent.train_batch()
        delta_w = np.abs(agent.net.weights[-1] - before)
        delta_b = np.abs(agent.net.biases[-1] - before_bias)
        untouched = [a for a in range(6) if a != 2]
        assert np.all(delta_w[:, untouched] == 0)
        assert np.all(delta_b[untouched] == 0)
        assert delta_w[:, 2].max() > 0


class TestSmallScaleRun:
    def test_runs_and_stays_deterministic(self):
        model = PopularityModel.identity(25, 1.2)
        trace = generate_static_trace(model, 600, seed=7)

        def run():
            agent = DqnAgent(make_config(capacity=4, epsilon_decay_epochs=50))
            return run_policy(trace, 4, agent, record_outcomes=False).chr

        assert run() == run()
