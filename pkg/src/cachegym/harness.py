"""Experiment driver: capacity sweeps, dynamic-popularity runs, the
Wolpertinger-vs-DQN efficiency comparison, and CSV result emission."""

from __future__ import annotations

import csv
import statistics
import time
from dataclasses import dataclass, field

from .baselines import FifoPolicy, LfuPolicy, LruPolicy
from .cache_core import NullPolicy, Policy, run_policy
from .dqn import DqnAgent
from .trace_gen import PopularityModel, Trace, generate_dynamic_trace, generate_static_trace
from .wolpertinger import AgentConfig, DrlCachingPolicy, WolpertingerAgent

RESULT_FIELDS = (
    "experiment",
    "seed",
    "policy",
    "capacity",
    "window_end",
    "chr",
    "evals_per_epoch",
    "sec_per_epoch",
)

EXPERIMENT_KINDS = ("capacity-sweep", "dynamic-popularity", "wolpertinger-vs-dqn", "runtime")

# Desk-scale defaults keep agent training tractable; the full-scale profile
# (N=5000, T=10000) is available via ExperimentSpec(full_scale=True).
DESK_NUM_CONTENTS = 500
DESK_REQUESTS = 20000
FULL_NUM_CONTENTS = 5000
FULL_REQUESTS = 10000
WARMUP_FRACTION = 0.2


@dataclass
class ExperimentSpec:
    kind: str
    num_contents: int = DESK_NUM_CONTENTS
    requests: int = DESK_REQUESTS
    zipf_exponent: float = 1.3
    change_interval: int | None = None  # dynamic traces; default requests // 5
    exponent_range: tuple[float, float] = (0.8, 1.5)
    capacities: list[int] = field(default_factory=lambda: [25])
    policies: list[str] = field(default_factory=lambda: ["lru", "lfu", "fifo", "wolpertinger"])
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2, 3, 4])
    window: int = 1000
    k_fraction: float = 0.15
    full_scale: bool = False
    # Score agents on a frozen-greedy pass after the online learning pass,
    # instead of scoring the online pass itself.
    frozen_evaluation: bool = False

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}; choose from {EXPERIMENT_KINDS}")
        if not (self.capacities and self.policies and self.seeds):
            raise ValueError("capacities, policies, and seeds must all be non-empty")
        if self.full_scale:
            self.num_contents = FULL_NUM_CONTENTS
            self.requests = FULL_REQUESTS


@dataclass
class ResultRow:
    experiment: str
    seed: int
    policy: str
    capacity: int
    window_end: int
    chr: float
    evals_per_epoch: float
    sec_per_epoch: float


def make_policy(name: str, capacity: int, seed: int, k_fraction: float = 0.15) -> Policy:
    name = name.lower()
    if name == "lru":
        return LruPolicy()
    if name == "lfu":
        return LfuPolicy()
    if name == "fifo":
        return FifoPolicy()
    if name == "null":
        return NullPolicy()
    if name in ("wolpertinger", "drl"):
        return WolpertingerAgent(AgentConfig(capacity=capacity, k_fraction=k_fraction, seed=seed))
    if name == "dqn":
        return DqnAgent(AgentConfig(capacity=capacity, seed=seed))
    raise ValueError(f"unknown policy {name!r}")


def split_warmup(trace: Trace) -> tuple[Trace, Trace]:
    """First 20% of the trace for offline pretraining, the rest for evaluation."""
    cut = max(1, int(trace.length * WARMUP_FRACTION))
    warmup = Trace(trace.requests[:cut], trace.num_contents, trace.seed, trace.change_log)
    evaluation = Trace(trace.requests[cut:], trace.num_contents, trace.seed, trace.change_log)
    return warmup, evaluation


def _run_cell(trace: Trace, capacity: int, policy: Policy, window: int, frozen: bool = False):
    """Pretrain agents on the warmup segment, then run everyone on the
    evaluation segment. With `frozen`, agents run the evaluation segment once
    more in online-learning mode first, and the scored pass is greedy with
    learning off. Returns (result, evals_per_epoch, sec_per_epoch)."""
    warmup, evaluation = split_warmup(trace)
    if isinstance(policy, DrlCachingPolicy):
        policy.pretrain_offline(warmup, capacity)
        if frozen:
            run_policy(evaluation, capacity, policy, window=window, record_outcomes=False)
            policy.frozen_greedy = True
            policy.reset_episode()
    start = time.perf_counter()
    result = run_policy(evaluation, capacity, policy, window=window, record_outcomes=False)
    elapsed = time.perf_counter() - start
    if isinstance(policy, DrlCachingPolicy):
        # Time agents inside decide(): the elapsed/epochs quotient folds the
        # simulator's per-request bookkeeping into the decision cost.
        evals = policy.mean_evaluations_per_greedy_epoch
        per_epoch = policy.seconds_per_decision
    else:
        evals = 0.0
        per_epoch = elapsed / result.decision_epochs if result.decision_epochs else 0.0
    return result, evals, per_epoch


def run_capacity_sweep(spec: ExperimentSpec) -> list[ResultRow]:
    """Final CHR per (capacity, policy, seed) on a static Zipf trace."""
    rows = []
    for seed in spec.seeds:
        model = PopularityModel.identity(spec.num_contents, spec.zipf_exponent)
        trace = generate_static_trace(model, spec.requests, seed)
        for capacity in spec.capacities:
            for name in spec.policies:
                policy = make_policy(name, capacity, seed, spec.k_fraction)
                result, evals, per_epoch = _run_cell(
                    trace, capacity, policy, spec.window, spec.frozen_evaluation
                )
                rows.append(
                    ResultRow(
                        spec.kind, seed, name, capacity,
                        result.accumulator.total_requests, result.chr, evals, per_epoch,
                    )
                )
    return rows


def run_dynamic_experiment(spec: ExperimentSpec) -> list[ResultRow]:
    """Windowed CHR series per policy over a shared piecewise-stationary trace."""
    rows = []
    capacity = spec.capacities[0]
    interval = spec.change_interval or spec.requests // 5
    for seed in spec.seeds:
        trace = generate_dynamic_trace(
            spec.num_contents, spec.requests, seed, interval, spec.exponent_range
        )
        for name in spec.policies:
            policy = make_policy(name, capacity, seed, spec.k_fraction)
            result, evals, per_epoch = _run_cell(
                trace, capacity, policy, spec.window, spec.frozen_evaluation
            )
            for window_end, window_chr in result.accumulator.windowed:
                rows.append(
                    ResultRow(spec.kind, seed, name, capacity, window_end, window_chr, evals, per_epoch)
                )
            rows.append(
                ResultRow(
                    spec.kind, seed, name, capacity,
                    result.accumulator.total_requests, result.chr, evals, per_epoch,
                )
            )
    return rows


def run_efficiency_experiment(spec: ExperimentSpec) -> list[ResultRow]:
    """Evaluation counts and wall-clock per decision epoch for DQN vs the
    Wolpertinger agent at two KNN sizes, at a fixed capacity (default 300)."""
    rows = []
    capacity = spec.capacities[0]
    agents = [
        ("dqn", None),
        ("k1", 0.15),
        ("k2", 0.05),
    ]
    for seed in spec.seeds:
        model = PopularityModel.identity(spec.num_contents, spec.zipf_exponent)
        trace = generate_static_trace(model, spec.requests, seed)
        for label, frac in agents:
            if frac is None:
                policy = DqnAgent(AgentConfig(capacity=capacity, seed=seed))
            else:
                policy = WolpertingerAgent(AgentConfig(capacity=capacity, k_fraction=frac, seed=seed))
            result, evals, per_epoch = _run_cell(
                trace, capacity, policy, spec.window, spec.frozen_evaluation
            )
            rows.append(
                ResultRow(
                    spec.kind, seed, label, capacity,
                    result.accumulator.total_requests, result.chr, evals, per_epoch,
                )
            )
    return rows


def run_experiment(spec: ExperimentSpec) -> list[ResultRow]:
    if spec.kind in ("capacity-sweep", "wolpertinger-vs-dqn"):
        return run_capacity_sweep(spec)
    if spec.kind == "dynamic-popularity":
        return run_dynamic_experiment(spec)
    return run_efficiency_experiment(spec)


def aggregate_rows(rows: list[ResultRow]) -> list[dict]:
    """Mean and stdev of the final CHR over seeds, per (policy, capacity)."""
    finals: dict[tuple[str, int], list[float]] = {}
    for row in rows:
        finals.setdefault((row.policy, row.capacity), []).append(row.chr)
    out = []
    for (policy, capacity), values in sorted(finals.items()):
        out.append(
            {
                "policy": policy,
                "capacity": capacity,
                "mean_chr": statistics.fmean(values),
                "std_chr": statistics.stdev(values) if len(values) > 1 else 0.0,
                "runs": len(values),
            }
        )
    return out


def emit_results(rows: list[ResultRow], path) -> None:
    """CSV with the fixed result header, plus a plot-ready aggregate alongside."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_FIELDS)
        for row in rows:
            writer.writerow(
                [
                    row.experiment, row.seed, row.policy, row.capacity, row.window_end,
                    repr(row.chr), repr(row.evals_per_epoch), repr(row.sec_per_epoch),
                ]
            )
    agg_path = str(path) + ".agg.csv"
    with open(agg_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["policy", "capacity", "mean_chr", "std_chr", "runs"])
        for entry in aggregate_rows(rows):
            writer.writerow(
                [entry["policy"], entry["capacity"], repr(entry["mean_chr"]),
                 repr(entry["std_chr"]), entry["runs"]]
            )


def read_results(path) -> list[ResultRow]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != RESULT_FIELDS:
            raise ValueError(f"unexpected results header {header!r}")
        return [
            ResultRow(
                rec[0], int(rec[1]), rec[2], int(rec[3]), int(rec[4]),
                float(rec[5]), float(rec[6]), float(rec[7]),
            )
            for rec in reader
        ]
