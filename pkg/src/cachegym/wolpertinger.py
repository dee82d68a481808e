"""DRL caching agent with actor proto-action, KNN expansion, critic refinement,
delayed two-horizon rewards, replay memory, and DDPG training."""

from __future__ import annotations

import math
import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .cache_core import CacheState, Policy, PolicyDecision
from .features import DEFAULT_WINDOWS, FeatureTracker, extract_state
from .nn import Adam, Mlp, soft_update
from .trace_gen import Trace


@dataclass
class AgentConfig:
    capacity: int
    k: int | None = None  # explicit expanded-action count; else ceil(k_fraction * C)
    k_fraction: float = 0.15
    gamma: float = 0.9
    buffer_capacity: int = 10000
    batch_size: int = 100
    tau: float = 0.001
    epsilon_start: float = 1.0
    epsilon_end: float = 0.1
    epsilon_decay_epochs: int = 3000
    reward_weight: float = 0.05
    long_horizon: int = 100
    actor_hidden: tuple[int, int] = (256, 128)
    critic_hidden: tuple[int, int] = (64, 32)
    actor_lr: float = 1e-4
    critic_lr: float = 1e-3
    feature_windows: tuple[int, int, int] = DEFAULT_WINDOWS
    normalize_features: bool = True
    pretrain_batches: int = 500
    train_batches_per_transition: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must be in (0, 1]")
        if self.batch_size > self.buffer_capacity:
            raise ValueError("batch_size cannot exceed buffer_capacity")
        if not 1 <= self.resolved_k <= self.capacity + 1:
            raise ValueError(f"k must lie in 1..C+1, got {self.resolved_k}")

    @property
    def resolved_k(self) -> int:
        if self.k is not None:
            return self.k
        return max(1, math.ceil(self.k_fraction * self.capacity))

    @property
    def state_size(self) -> int:
        return 3 * (self.capacity + 1)


@dataclass
class Transition:
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray


@dataclass
class _PendingTransition:
    state: np.ndarray
    action: int
    next_state: np.ndarray
    r_short: int = 0
    hits: int = 0
    seen: int = 0


class ReplayBuffer:
    """Bounded ring of resolved transitions, evicted strictly oldest-first;
    uniform sampling with replacement."""

    def __init__(self, capacity: int, seed: int = 0):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.inserted = 0
        self._data: list[Transition] = []
        self._next = 0
        self._rng = np.random.default_rng(seed)

    def __len__(self) -> int:
        return len(self._data)

    def __iter__(self):
        return iter(self._data)

    def push(self, transition: Transition) -> None:
        if len(self._data) < self.capacity:
            self._data.append(transition)
        else:
            self._data[self._next] = transition
        self._next = (self._next + 1) % self.capacity
        self.inserted += 1

    def sample(self, count: int) -> list[Transition]:
        if not self._data:
            raise ValueError("cannot sample from an empty buffer")
        idx = self._rng.integers(0, len(self._data), size=count)
        return [self._data[i] for i in idx]


def knn_expand(proto: float, k: int, capacity: int) -> np.ndarray:
    """The min(k, C+1) integer actions closest to `proto` by squared distance,
    ordered nearest-first; distance ties resolve toward the smaller integer."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    actions = np.arange(capacity + 1)
    distances = (actions - proto) ** 2
    order = np.lexsort((actions, distances))
    return actions[order[: min(k, capacity + 1)]]


class DrlCachingPolicy(Policy):
    """Shared machinery for the DRL agents: feature tracking, epsilon-greedy
    execution, the pending-reward lifecycle, replay memory, and train cadence
    (one batch per resolved transition once the buffer holds a full batch).

    Subclasses provide greedy action selection and the parameter update.
    """

    def __init__(self, config: AgentConfig):
        self.config = config
        self.rng = np.random.default_rng(config.seed)
        self.buffer = ReplayBuffer(config.buffer_capacity, seed=config.seed + 1)
        self.tracker = FeatureTracker(config.feature_windows)
        self.pending: deque[_PendingTransition] = deque()
        self.learning = True
        self.offline = False  # pure-exploration collection phase: epsilon = 1, no updates
        self.frozen_greedy = False  # evaluation flag: epsilon = 0, no updates
        self.online_epochs = 0
        self.greedy_epochs = 0
        self.total_evaluations = 0
        self.decide_times: list[float] = []
        self._stash: tuple[np.ndarray, int] | None = None

    # -- subclass surface ---------------------------------------------------
    def greedy_action(self, state: np.ndarray) -> tuple[int, int]:
        """Returns (action, number of value-network evaluations)."""
        raise NotImplementedError

    def train_batch(self) -> bool:
        raise NotImplementedError

    # -- epsilon-greedy execution -------------------------------------------
    @property
    def epsilon(self) -> float:
        if self.offline:
            return 1.0
        if self.frozen_greedy:
            return 0.0
        cfg = self.config
        if self.online_epochs >= cfg.epsilon_decay_epochs:
            return cfg.epsilon_end
        frac = self.online_epochs / cfg.epsilon_decay_epochs
        return cfg.epsilon_start + frac * (cfg.epsilon_end - cfg.epsilon_start)

    def select_action(self, state: np.ndarray) -> tuple[int, int]:
        """Epsilon-greedy over {0..C}; returns (action, evaluation count).

        The evaluation count is 0 on the exploration branch and the number of
        value-network evaluations on the greedy branch.
        """
        if self.rng.random() < self.epsilon:
            return int(self.rng.integers(0, self.config.capacity + 1)), 0
        action, evaluations = self.greedy_action(state)
        self.greedy_epochs += 1
        self.total_evaluations += evaluations
        return action, evaluations

    @property
    def mean_evaluations_per_greedy_epoch(self) -> float:
        if self.greedy_epochs == 0:
            return 0.0
        return self.total_evaluations / self.greedy_epochs

    @property
    def seconds_per_decision(self) -> float:
        """Median per-decision wall clock; the median shrugs off scheduler
        hiccups that would dominate a mean."""
        if not self.decide_times:
            return 0.0
        return float(np.median(self.decide_times))

    # -- policy hooks driven by the simulator -------------------------------
    def notify_request(self, epoch: int, content: int, hit: bool) -> None:
        self.tracker.observe(content)
        self._age_pending(hit)

    def decide(self, epoch: int, cache: CacheState, content: int) -> PolicyDecision:
        started = time.perf_counter()
        state = extract_state(self.tracker, cache, content, self.config.normalize_features)
        action, _ = self.select_action(state)
        if not self.offline:
            self.online_epochs += 1
        self._stash = (state, action)
        self.decide_times.append(time.perf_counter() - started)
        return PolicyDecision(action)

    def after_apply(self, epoch, cache, content, action, next_request) -> None:
        state, stashed_action = self._stash
        self._stash = None
        assert stashed_action == action
        if next_request is None:
            return
        next_state = extract_state(self.tracker, cache, next_request, self.config.normalize_features)
        self.pending.append(_PendingTransition(state, action, next_state))

    def finish(self) -> None:
        # Trace ended: resolve the stragglers over their truncated horizons,
        # scaling the long-term component to the full-horizon range.
        horizon = self.config.long_horizon
        while self.pending:
            p = self.pending.popleft()
            long_reward = p.hits * (horizon / p.seen) if p.seen else 0.0
            self._push_resolved(p, long_reward)

    def step(self, epoch: int, cache: CacheState, content: int, next_request: int | None) -> PolicyDecision:
        """One full decision epoch: build state, select, mutate cache, open the
        pending transition. Convenience wrapper around the simulator hooks."""
        decision = self.decide(epoch, cache, content)
        cache.apply_decision(content, decision)
        self.after_apply(epoch, cache, content, decision.action, next_request)
        return decision

    # -- delayed rewards ----------------------------------------------------
    def _age_pending(self, hit: bool) -> None:
        horizon = self.config.long_horizon
        for p in self.pending:
            p.seen += 1
            p.hits += hit
            if p.seen == 1:
                p.r_short = int(hit)
        while self.pending and self.pending[0].seen >= horizon:
            p = self.pending.popleft()
            self._push_resolved(p, float(p.hits))

    def _push_resolved(self, p: _PendingTransition, long_reward: float) -> None:
        reward = p.r_short + self.config.reward_weight * long_reward
        self.buffer.push(Transition(p.state, p.action, reward, p.next_state))
        if self.learning and not self.offline and not self.frozen_greedy:
            for _ in range(self.config.train_batches_per_transition):
                self.train_batch()

    def reset_episode(self) -> None:
        """Drop per-run state (features, pendings) while keeping learned
        parameters, buffer contents, and the epsilon schedule position."""
        self.tracker = FeatureTracker(self.config.feature_windows)
        self.pending.clear()
        self._stash = None
        self.decide_times.clear()

    def pretrain_offline(self, trace: Trace, capacity: int | None = None) -> None:
        """Offline phase: collect transitions under pure exploration, then run
        batch updates to initialize the online-phase parameters."""
        from .cache_core import run_policy

        if trace.length < self.config.long_horizon:
            raise ValueError(
                f"warmup segment of {trace.length} requests is shorter than the "
                f"{self.config.long_horizon}-request reward horizon"
            )
        self.offline = True
        try:
            run_policy(trace, capacity or self.config.capacity, self, record_outcomes=False)
        finally:
            self.offline = False
        for _ in range(self.config.pretrain_batches):
            if not self.train_batch():
                break
        self.reset_episode()


class WolpertingerAgent(DrlCachingPolicy):
    """Actor proposes a continuous proto-action, KNN expands it to the nearest
    discrete actions, and the critic picks the highest-Q member; trained with
    deep deterministic policy gradient."""

    name = "wolpertinger"

    def __init__(self, config: AgentConfig):
        super().__init__(config)
        cfg = config
        self.actor = Mlp(
            (cfg.state_size, *cfg.actor_hidden, 1),
            seed=cfg.seed + 2,
            output_activation="logistic",
        )
        # Critic input: state, the action normalized to [0, 1], and the state's
        # request counts at the action's slot. A plain MLP struggles to learn the
        # slot lookup from a scalar channel alone, so the lookup is precomputed.
        critic_in = cfg.state_size + 1 + len(cfg.feature_windows)
        self.critic = Mlp((critic_in, *cfg.critic_hidden, 1), seed=cfg.seed + 3)
        self.target_actor = self.actor.copy()
        self.target_critic = self.critic.copy()
        self.actor_opt = Adam(self.actor, lr=cfg.actor_lr)
        self.critic_opt = Adam(self.critic, lr=cfg.critic_lr)

    def proto_action(self, state: np.ndarray) -> float:
        out, _ = self.actor.forward(state)
        return float(self.config.capacity * out[0])

    def critic_inputs(self, states: np.ndarray, scaled_actions: np.ndarray) -> np.ndarray:
        """Critic input rows for a batch of states and actions in [0, 1]: the
        state, the scaled action, and the state entries for the nearest integer
        action's slot (one per request-count window)."""
        cfg = self.config
        slots = np.rint(np.asarray(scaled_actions) * cfg.capacity).astype(np.int64)
        blocks = (cfg.capacity + 1) * np.arange(len(cfg.feature_windows))
        lookups = np.take_along_axis(states, slots[:, None] + blocks[None, :], axis=1)
        return np.hstack([states, np.asarray(scaled_actions)[:, None], lookups])

    def critic_q(self, state: np.ndarray, action: int) -> float:
        if not 0 <= action <= self.config.capacity:
            raise ValueError(f"action {action} outside 0..{self.config.capacity}")
        x = self.critic_inputs(state[None, :], np.array([action / self.config.capacity]))
        out, _ = self.critic.forward(x)
        return float(out[0, 0])

    def greedy_action(self, state: np.ndarray) -> tuple[int, int]:
        cfg = self.config
        candidates = knn_expand(self.proto_action(state), cfg.resolved_k, cfg.capacity)
        states = np.broadcast_to(state, (len(candidates), cfg.state_size))
        inputs = self.critic_inputs(states, candidates / cfg.capacity)
        q_values, _ = self.critic.forward(inputs)
        best = candidates[np.lexsort((candidates, -q_values[:, 0]))[0]]
        return int(best), len(candidates)

    def train_batch(self) -> bool:
        cfg = self.config
        if len(self.buffer) < cfg.batch_size:
            return False
        batch = self.buffer.sample(cfg.batch_size)
        states = np.stack([t.state for t in batch])
        actions = np.array([t.action for t in batch], dtype=np.float64)
        rewards = np.array([t.reward for t in batch])
        next_states = np.stack([t.next_state for t in batch])
        n = cfg.batch_size

        # Targets use the target actor's continuous scaled output directly
        # (no KNN refinement): its logistic output is already the normalized action.
        next_actions, _ = self.target_actor.forward(next_states)
        target_q, _ = self.target_critic.forward(self.critic_inputs(next_states, next_actions[:, 0]))
        targets = rewards + cfg.gamma * target_q[:, 0]

        # Critic: minimize mean squared error against the targets.
        critic_in = self.critic_inputs(states, actions / cfg.capacity)
        q, critic_cache = self.critic.forward(critic_in)
        residual = q[:, 0] - targets
        critic_grads, _ = self.critic.backward(critic_cache, (2.0 / n) * residual[:, None])
        self.critic_opt.step(self.critic, critic_grads)

        # Actor: ascend mean Q(s, mu(s)) along the critic's action gradient.
        # The slot-lookup channels are piecewise constant in the action, so the
        # gradient flows through the scaled-action channel only.
        mu, actor_cache = self.actor.forward(states)
        _, pi_cache = self.critic.forward(self.critic_inputs(states, mu[:, 0]))
        _, input_grad = self.critic.backward(pi_cache, np.full((n, 1), -1.0 / n))
        actor_grads, _ = self.actor.backward(actor_cache, input_grad[:, cfg.state_size : cfg.state_size + 1])
        self.actor_opt.step(self.actor, actor_grads)

        soft_update(self.target_critic, self.critic, cfg.tau)
        soft_update(self.target_actor, self.actor, cfg.tau)
        return True

    def save(self, actor_path, critic_path) -> None:
        self.actor.save(actor_path)
        self.critic.save(critic_path)
