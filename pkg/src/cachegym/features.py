"""Sliding-window request counts and the agent's observed state vector."""

from __future__ import annotations

from collections import deque

import numpy as np

from .cache_core import CacheState

DEFAULT_WINDOWS = (10, 100, 1000)


class FeatureTracker:
    """Rolling per-content request counts over short/medium/long windows.

    Counts are maintained incrementally in O(1) per observation and cover all
    contents ever seen, not only cached ones, so the currently requested
    content's history is available at decision time.
    """

    def __init__(self, windows: tuple[int, int, int] = DEFAULT_WINDOWS):
        if not all(w >= 1 for w in windows):
            raise ValueError(f"window lengths must be >= 1, got {windows}")
        self.windows = tuple(windows)
        self._history: deque[int] = deque(maxlen=max(windows))
        self._counts: tuple[dict[int, int], ...] = tuple({} for _ in windows)

    def observe(self, content: int) -> None:
        for window, counts in zip(self.windows, self._counts):
            if len(self._history) >= window:
                leaving = self._history[-window]
                remaining = counts[leaving] - 1
                if remaining:
                    counts[leaving] = remaining
                else:
                    del counts[leaving]
            counts[content] = counts.get(content, 0) + 1
        self._history.append(content)

    def count(self, content: int, window_index: int) -> int:
        return self._counts[window_index].get(content, 0)

    def count_many(self, contents: list[int | None], window_index: int) -> np.ndarray:
        """Counts for a batch of content IDs; None entries count as 0."""
        counts = self._counts[window_index]
        return np.array(
            [counts.get(c, 0) if c is not None else 0 for c in contents],
            dtype=np.float64,
        )


def extract_state(
    tracker: FeatureTracker,
    cache: CacheState,
    requested: int,
    normalize: bool = True,
) -> np.ndarray:
    """State vector of length 3(C+1): per window, the requested content's count at
    index 0 followed by each cache slot's count; empty slots contribute 0.
    """
    ids = [requested, *cache.occupants()]
    blocks = [tracker.count_many(ids, widx) for widx in range(len(tracker.windows))]
    if normalize:
        for block, window in zip(blocks, tracker.windows):
            block /= window
    return np.concatenate(blocks)
