"""cachegym: a content-caching policy laboratory with a Wolpertinger DRL agent,
DQN and LRU/LFU/FIFO baselines, and a deterministic Zipf-workload simulator."""

from .baselines import FifoPolicy, LfuPolicy, LruPolicy
from .cache_core import (
    CacheState,
    HitRateAccumulator,
    NullPolicy,
    Policy,
    PolicyDecision,
    run_policy,
)
from .dqn import DqnAgent, DqnConfig
from .features import FeatureTracker, extract_state
from .nn import Adam, Mlp, soft_update
from .trace_gen import (
    PopularityModel,
    Trace,
    generate_dynamic_trace,
    generate_static_trace,
    read_trace,
    write_trace,
    zipf_probabilities,
)
from .wolpertinger import AgentConfig, ReplayBuffer, Transition, WolpertingerAgent, knn_expand

__version__ = "0.1.0"

__all__ = [
    "Adam",
    "AgentConfig",
    "CacheState",
    "DqnAgent",
    "DqnConfig",
    "FeatureTracker",
    "FifoPolicy",
    "HitRateAccumulator",
    "LfuPolicy",
    "LruPolicy",
    "Mlp",
    "NullPolicy",
    "Policy",
    "PolicyDecision",
    "PopularityModel",
    "ReplayBuffer",
    "Trace",
    "Transition",
    "WolpertingerAgent",
    "extract_state",
    "generate_dynamic_trace",
    "generate_static_trace",
    "knn_expand",
    "read_trace",
    "run_policy",
    "soft_update",
    "write_trace",
    "zipf_probabilities",
]
