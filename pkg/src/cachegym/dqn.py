"""Deep Q-Network baseline over the same state/action/reward formulation."""

from __future__ import annotations

import numpy as np

from .nn import Adam, Mlp, soft_update
from .wolpertinger import AgentConfig, DrlCachingPolicy

# Same gamma, buffer, batch, epsilon schedule, and reward machinery as the
# Wolpertinger agent; only the action-selection mechanism differs.
DqnConfig = AgentConfig


class DqnAgent(DrlCachingPolicy):
    """Single network with C+1 Q-outputs; greedy selection scans them all."""

    name = "dqn"

    def __init__(self, config: AgentConfig):
        super().__init__(config)
        cfg = config
        self.net = Mlp((cfg.state_size, *cfg.actor_hidden, cfg.capacity + 1), seed=cfg.seed + 2)
        self.target = self.net.copy()
        self.opt = Adam(self.net, lr=cfg.critic_lr)

    def q_values(self, state: np.ndarray) -> np.ndarray:
        out, _ = self.net.forward(state)
        return out

    def greedy_action(self, state: np.ndarray) -> tuple[int, int]:
        q = self.q_values(state)
        return int(np.argmax(q)), self.config.capacity + 1

    def train_batch(self) -> bool:
        cfg = self.config
        if len(self.buffer) < cfg.batch_size:
            return False
        batch = self.buffer.sample(cfg.batch_size)
        states = np.stack([t.state for t in batch])
        actions = np.array([t.action for t in batch])
        rewards = np.array([t.reward for t in batch])
        next_states = np.stack([t.next_state for t in batch])
        n = cfg.batch_size

        next_q, _ = self.target.forward(next_states)
        targets = rewards + cfg.gamma * next_q.max(axis=1)

        q, cache = self.net.forward(states)
        rows = np.arange(n)
        grad = np.zeros_like(q)
        grad[rows, actions] = (2.0 / n) * (q[rows, actions] - targets)
        grads, _ = self.net.backward(cache, grad)
        self.opt.step(self.net, grads)

        soft_update(self.target, self.net, cfg.tau)
        return True

    def save(self, path) -> None:
        self.net.save(path)
