"""Seeded request-trace generation under static or time-varying Zipf popularity."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np


class TraceFormatError(ValueError):
    """Raised when a trace file cannot be parsed; carries the offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def zipf_probabilities(num_contents: int, exponent: float) -> np.ndarray:
    """Probability of each popularity rank 1..N, p_r proportional to 1/r^exponent."""
    if num_contents < 1:
        raise ValueError(f"num_contents must be >= 1, got {num_contents}")
    if exponent <= 0:
        raise ValueError(f"exponent must be > 0, got {exponent}")
    weights = 1.0 / np.arange(1, num_contents + 1, dtype=np.float64) ** exponent
    return weights / weights.sum()


def _perm_digest(perm: np.ndarray) -> str:
    return hashlib.sha1(np.ascontiguousarray(perm, dtype=np.int64).tobytes()).hexdigest()[:16]


@dataclass(frozen=True)
class PopularityModel:
    """Zipf popularity over content IDs 1..N via a rank permutation.

    rank_permutation[i-1] is the popularity rank (1 = most popular) of content i.
    """

    num_contents: int
    exponent: float
    rank_permutation: np.ndarray

    def __post_init__(self):
        perm = np.asarray(self.rank_permutation, dtype=np.int64)
        object.__setattr__(self, "rank_permutation", perm)
        if perm.shape != (self.num_contents,):
            raise ValueError("rank_permutation length must equal num_contents")
        if not np.array_equal(np.sort(perm), np.arange(1, self.num_contents + 1)):
            raise ValueError("rank_permutation must be a bijection over 1..N")

    @classmethod
    def identity(cls, num_contents: int, exponent: float) -> "PopularityModel":
        return cls(num_contents, exponent, np.arange(1, num_contents + 1))

    def probabilities(self) -> np.ndarray:
        """Per-content request probabilities, indexed by content ID - 1."""
        by_rank = zipf_probabilities(self.num_contents, self.exponent)
        return by_rank[self.rank_permutation - 1]

    def digest(self) -> str:
        return _perm_digest(self.rank_permutation)


@dataclass
class ChangeEvent:
    index: int
    exponent: float
    perm_digest: str


@dataclass
class Trace:
    requests: np.ndarray
    num_contents: int
    seed: int
    change_log: list[ChangeEvent] = field(default_factory=list)

    def __post_init__(self):
        self.requests = np.asarray(self.requests, dtype=np.int64)

    @property
    def length(self) -> int:
        return len(self.requests)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trace):
            return NotImplemented
        return (
            self.num_contents == other.num_contents
            and self.seed == other.seed
            and np.array_equal(self.requests, other.requests)
            and [(c.index, c.exponent, c.perm_digest) for c in self.change_log]
            == [(c.index, c.exponent, c.perm_digest) for c in other.change_log]
        )


def _sample(model: PopularityModel, count: int, rng: np.random.Generator) -> np.ndarray:
    # Inverse-CDF with binary search: exact and O(log N) per request.
    cumulative = np.cumsum(model.probabilities())
    cumulative[-1] = 1.0
    return np.searchsorted(cumulative, rng.random(count), side="right") + 1


def generate_static_trace(model: PopularityModel, length: int, seed: int) -> Trace:
    """Draw `length` i.i.d. requests from `model`; bit-identical for identical inputs."""
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    rng = np.random.default_rng(seed)
    requests = _sample(model, length, rng)
    log = [ChangeEvent(0, model.exponent, model.digest())]
    return Trace(requests, model.num_contents, seed, log)


def generate_dynamic_trace(
    num_contents: int,
    length: int,
    seed: int,
    change_interval: int,
    exponent_range: tuple[float, float] = (0.8, 1.5),
) -> Trace:
    """Piecewise-stationary Zipf trace; popularity redrawn every `change_interval` requests."""
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    if change_interval < 1:
        raise ValueError(f"change_interval must be >= 1, got {change_interval}")
    lo, hi = exponent_range
    if not (0 < lo <= hi):
        raise ValueError(f"exponent_range must satisfy 0 < lo <= hi, got {exponent_range}")
    rng = np.random.default_rng(seed)
    pieces = []
    log = []
    for start in range(0, length, change_interval):
        exponent = float(rng.uniform(lo, hi))
        perm = rng.permutation(num_contents) + 1
        model = PopularityModel(num_contents, exponent, perm)
        log.append(ChangeEvent(start, exponent, model.digest()))
        pieces.append(_sample(model, min(change_interval, length - start), rng))
    return Trace(np.concatenate(pieces), num_contents, seed, log)


def write_trace(trace: Trace, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"#cachegym-trace v1 N={trace.num_contents} T={trace.length} seed={trace.seed}\n")
        for event in trace.change_log:
            fh.write(f"#change idx={event.index} s={event.exponent!r} perm={event.perm_digest}\n")
        for request in trace.requests:
            fh.write(f"{request}\n")


def read_trace(path) -> Trace:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise TraceFormatError("empty trace file", 1)
    header = lines[0].split()
    if len(header) != 5 or header[0] != "#cachegym-trace" or header[1] != "v1":
        raise TraceFormatError("bad header, expected '#cachegym-trace v1 N=.. T=.. seed=..'", 1)
    try:
        num_contents = int(header[2].removeprefix("N="))
        length = int(header[3].removeprefix("T="))
        seed = int(header[4].removeprefix("seed="))
    except ValueError:
        raise TraceFormatError("unparsable header fields", 1) from None
    requests = []
    change_log = []
    for lineno, line in enumerate(lines[1:], start=2):
        if line.startswith("#change "):
            parts = line.split()
            try:
                change_log.append(
                    ChangeEvent(
                        int(parts[1].removeprefix("idx=")),
                        float(parts[2].removeprefix("s=")),
                        parts[3].removeprefix("perm="),
                    )
                )
            except (IndexError, ValueError):
                raise TraceFormatError("malformed change event", lineno) from None
            continue
        if line.startswith("#") or not line.strip():
            continue
        try:
            request = int(line)
        except ValueError:
            raise TraceFormatError(f"expected integer content ID, got {line!r}", lineno) from None
        if not 1 <= request <= num_contents:
            raise TraceFormatError(f"content ID {request} outside 1..{num_contents}", lineno)
        requests.append(request)
    if len(requests) != length:
        raise TraceFormatError(f"header declares T={length} but found {len(requests)} requests", 1)
    return Trace(np.array(requests, dtype=np.int64), num_contents, seed, change_log)
