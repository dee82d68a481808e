"""Fixed-capacity cache simulation loop and hit-rate accounting."""

from __future__ import annotations

from dataclasses import dataclass, field

from .trace_gen import Trace


class InvalidActionError(ValueError):
    pass


@dataclass(frozen=True)
class PolicyDecision:
    """Replacement action: 0 = do not cache, v >= 1 = replace the content in slot v."""

    action: int


class CacheState:
    """Fixed-capacity set of content IDs with stable slot indexing 1..C."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._slots: list[int | None] = [None] * capacity
        self._slot_of: dict[int, int] = {}

    def __len__(self) -> int:
        return len(self._slot_of)

    @property
    def full(self) -> bool:
        return len(self._slot_of) == self.capacity

    def contents(self) -> list[int]:
        return list(self._slot_of)

    def slot_of(self, content: int) -> int | None:
        return self._slot_of.get(content)

    def occupants(self) -> list[int | None]:
        """Occupants in slot order 1..C; None marks an empty slot."""
        return list(self._slots)

    def occupant(self, slot: int) -> int | None:
        if not 1 <= slot <= self.capacity:
            raise InvalidActionError(f"slot {slot} outside 1..{self.capacity}")
        return self._slots[slot - 1]

    def lookup(self, content: int) -> bool:
        return content in self._slot_of

    def admit_when_not_full(self, content: int) -> int:
        """Place `content` in the lowest-index empty slot; returns the slot."""
        if content in self._slot_of:
            raise InvalidActionError(f"content {content} already cached")
        if self.full:
            raise InvalidActionError("cache is full")
        slot = self._slots.index(None) + 1
        self._slots[slot - 1] = content
        self._slot_of[content] = slot
        return slot

    def apply_decision(self, content: int, decision: PolicyDecision) -> int | None:
        """Execute a replacement decision; returns the evicted content, or None for action 0."""
        if content in self._slot_of:
            raise InvalidActionError(f"content {content} already cached")
        action = decision.action
        if action == 0:
            return None
        if not 1 <= action <= self.capacity:
            raise InvalidActionError(f"action {action} outside 0..{self.capacity}")
        evicted = self._slots[action - 1]
        if evicted is None:
            raise InvalidActionError(f"slot {action} is empty")
        del self._slot_of[evicted]
        self._slots[action - 1] = content
        self._slot_of[content] = action
        return evicted


@dataclass
class HitRateAccumulator:
    """Cumulative and per-window cache hit rate over a request stream."""

    window: int = 1000
    total_requests: int = 0
    total_hits: int = 0
    windowed: list[tuple[int, float]] = field(default_factory=list)
    _window_hits: int = 0

    def record(self, hit: bool) -> None:
        self.total_requests += 1
        self.total_hits += hit
        self._window_hits += hit
        if self.total_requests % self.window == 0:
            self.windowed.append((self.total_requests, self._window_hits / self.window))
            self._window_hits = 0

    @property
    def chr(self) -> float:
        if self.total_requests == 0:
            return 0.0
        return self.total_hits / self.total_requests


@dataclass
class OutcomeRecord:
    epoch: int
    content: int
    hit: bool
    action: int | None  # replacement action, None when no decision was requested


class Policy:
    """Base replacement policy; the simulator drives these hooks.

    `decide` is invoked only on a miss with a full cache; every policy sees every
    request through `notify_request` for bookkeeping.
    """

    name = "policy"

    def notify_request(self, epoch: int, content: int, hit: bool) -> None:
        pass

    def notify_admit(self, epoch: int, content: int, slot: int) -> None:
        pass

    def notify_evict(self, epoch: int, content: int, slot: int) -> None:
        pass

    def decide(self, epoch: int, cache: CacheState, content: int) -> PolicyDecision:
        raise NotImplementedError

    def after_apply(
        self, epoch: int, cache: CacheState, content: int, action: int, next_request: int | None
    ) -> None:
        pass

    def finish(self) -> None:
        pass


@dataclass
class SimulationResult:
    accumulator: HitRateAccumulator
    outcomes: list[OutcomeRecord]
    decision_epochs: int

    @property
    def chr(self) -> float:
        return self.accumulator.chr


def run_policy(
    trace: Trace,
    capacity: int,
    policy: Policy,
    window: int = 1000,
    record_outcomes: bool = True,
    check_invariants: bool = False,
) -> SimulationResult:
    """Drive `policy` over `trace` with a cache of size `capacity`.

    Loop per request: lookup, then on a hit only count; on a miss admit if the cache
    has room, otherwise ask the policy for a replacement decision and apply it.
    """
    if trace.length < 1:
        raise ValueError("trace must contain at least one request")
    cache = CacheState(capacity)
    accumulator = HitRateAccumulator(window=window)
    outcomes: list[OutcomeRecord] = []
    decision_epochs = 0
    requests = trace.requests
    for epoch in range(len(requests)):
        content = int(requests[epoch])
        hit = cache.lookup(content)
        accumulator.record(hit)
        policy.notify_request(epoch, content, hit)
        action: int | None = None
        if not hit:
            if not cache.full:
                slot = cache.admit_when_not_full(content)
                policy.notify_admit(epoch, content, slot)
            else:
                decision_epochs += 1
                try:
                    decision = policy.decide(epoch, cache, content)
                except Exception as exc:
                    raise RuntimeError(f"policy {policy.name!r} failed at epoch {epoch}") from exc
                action = decision.action
                evicted = cache.apply_decision(content, decision)
                if evicted is not None:
                    policy.notify_evict(epoch, evicted, action)
                    policy.notify_admit(epoch, content, action)
                next_request = int(requests[epoch + 1]) if epoch + 1 < len(requests) else None
                policy.after_apply(epoch, cache, content, action, next_request)
        if record_outcomes:
            outcomes.append(OutcomeRecord(epoch, content, hit, action))
        if check_invariants:
            assert len(cache) <= capacity
            assert len(set(cache.contents())) == len(cache)
    policy.finish()
    return SimulationResult(accumulator, outcomes, decision_epochs)


def write_outcome_log(outcomes: list[OutcomeRecord], path) -> None:
    with open(path, "w") as fh:
        for rec in outcomes:
            action = "" if rec.action is None else str(rec.action)
            fh.write(f"{rec.epoch},{rec.content},{'hit' if rec.hit else 'miss'},{action}\n")


def recount_chr(outcomes: list[OutcomeRecord]) -> float:
    """Brute-force CHR recount from the outcome log, for oracle cross-checks."""
    if not outcomes:
        return 0.0
    return sum(rec.hit for rec in outcomes) / len(outcomes)


class NullPolicy(Policy):
    """Never caches once full; lower-bounds every other policy's CHR."""

    name = "null"

    def decide(self, epoch, cache, content):
        return PolicyDecision(0)
