"""Classical replacement policies: LRU, LFU, FIFO."""

from __future__ import annotations

from .cache_core import CacheState, Policy, PolicyDecision


class LruPolicy(Policy):
    """Evicts the cached content least recently requested."""

    name = "lru"

    def __init__(self):
        self.last_request: dict[int, int] = {}

    def notify_request(self, epoch, content, hit):
        if hit:
            self.last_request[content] = epoch

    def notify_admit(self, epoch, content, slot):
        self.last_request[content] = epoch

    def notify_evict(self, epoch, content, slot):
        del self.last_request[content]

    def decide(self, epoch, cache: CacheState, content) -> PolicyDecision:
        victim = min(cache.contents(), key=lambda c: (self.last_request[c], cache.slot_of(c)))
        return PolicyDecision(cache.slot_of(victim))


class LfuPolicy(Policy):
    """Evicts the cached content with the fewest requests since it was cached.

    Counts start at admission and are discarded on eviction; ties break by least
    recent request, then lowest slot index.
    """

    name = "lfu"

    def __init__(self):
        self.counts: dict[int, int] = {}
        self.last_request: dict[int, int] = {}

    def notify_request(self, epoch, content, hit):
        if hit:
            self.counts[content] += 1
            self.last_request[content] = epoch

    def notify_admit(self, epoch, content, slot):
        self.counts[content] = 1
        self.last_request[content] = epoch

    def notify_evict(self, epoch, content, slot):
        del self.counts[content]
        del self.last_request[content]

    def decide(self, epoch, cache: CacheState, content) -> PolicyDecision:
        victim = min(
            cache.contents(),
            key=lambda c: (self.counts[c], self.last_request[c], cache.slot_of(c)),
        )
        return PolicyDecision(cache.slot_of(victim))


class FifoPolicy(Policy):
    """Evicts the cached content that was stored earliest."""

    name = "fifo"

    def __init__(self):
        self.inserted_at: dict[int, int] = {}

    def notify_admit(self, epoch, content, slot):
        self.inserted_at[content] = epoch

    def notify_evict(self, epoch, content, slot):
        del self.inserted_at[content]

    def decide(self, epoch, cache: CacheState, content) -> PolicyDecision:
        victim = min(cache.contents(), key=lambda c: (self.inserted_at[c], cache.slot_of(c)))
        return PolicyDecision(cache.slot_of(victim))
