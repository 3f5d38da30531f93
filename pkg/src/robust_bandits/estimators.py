"""Incremental mean estimators: running mean, monotone-truncated mean, median of means."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

MOM_CONST = 32.0


class MonotonicityError(ValueError):
    """A truncation threshold went down, so the scaling function is not nondecreasing."""


def _finite(x) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"non-finite sample {x!r}")
    return x


def median(values) -> float:
    """Exact median; even counts use the midpoint of the two middle order statistics."""
    s = sorted(values)
    n = len(s)
    if n == 0:
        raise ValueError("median of an empty sample")
    m = n // 2
    if n % 2:
        return s[m]
    return (s[m - 1] + s[m]) / 2


@dataclass
class RunningMean:
    count: int = 0
    sum: float = 0.0

    def absorb(self, x) -> None:
        self.sum += _finite(x)
        self.count += 1

    def query(self) -> float:
        if self.count == 0:
            raise ValueError("running mean of an empty sample")
        return self.sum / self.count


@dataclass
class TruncatedMeanState:
    """(1/u) * sum of X * 1{|X| <= tau} for a nondecreasing sequence of tau.

    Samples above the current watermark wait in a min-heap keyed by |X|; once a
    query threshold passes them they move into a compensated running sum and
    never leave. Each sample is pushed and popped at most once.
    """

    last_threshold: float = -math.inf
    total_count: int = 0
    included_sum: float = 0.0
    _comp: float = 0.0
    pending: list = field(default_factory=list)
    pops: int = 0

    def _add(self, x: float) -> None:
        # Neumaier summation
        s = self.included_sum
        t = s + x
        if abs(s) >= abs(x):
            self._comp += (s - t) + x
        else:
            self._comp += (x - t) + s
        self.included_sum = t

    def absorb(self, x) -> None:
        x = _finite(x)
        self.total_count += 1
        if abs(x) <= self.last_threshold:
            self._add(x)
        else:
            heapq.heappush(self.pending, (abs(x), x))

    def query(self, tau: float) -> float:
        if tau < self.last_threshold:
            raise MonotonicityError(
                f"truncation threshold decreased from {self.last_threshold} to {tau}"
            )
        if self.total_count == 0:
            raise ValueError("truncated mean of an empty sample")
        self.last_threshold = tau
        pending = self.pending
        while pending and pending[0][0] <= tau:
            self._add(heapq.heappop(pending)[1])
            self.pops += 1
        return (self.included_sum + self._comp) / self.total_count


@dataclass
class MoMState:
    """Full-retention sample buffer with a median-of-means query.

    The bin count is q = ceil(32 log t) for the query round t; bins are
    consecutive arrival-order chunks of size N = ceil(u/q), the last possibly
    short. With u <= 32 log t the plain sample median is returned.
    """

    samples: list = field(default_factory=list)
    _cache_key: tuple | None = None
    _cache_value: float = math.nan
    recomputes: int = 0

    def absorb(self, x) -> None:
        self.samples.append(_finite(x))

    def query(self, t: int) -> float:
        u = len(self.samples)
        if u == 0:
            raise ValueError("median of means of an empty sample")
        if t < 3:
            raise ValueError(f"median of means needs t >= 3, got {t}")
        log_t = math.log(t)
        q = math.ceil(MOM_CONST * log_t)
        key = (u, q)
        if key == self._cache_key:
            return self._cache_value
        self.recomputes += 1
        if u > MOM_CONST * log_t:
            n = -(-u // q)
            value = median(bin_means(self.samples, n))
        else:
            value = median(self.samples)
        self._cache_key, self._cache_value = key, value
        return value


def bin_means(samples, n: int) -> list[float]:
    """Means of consecutive chunks of length n; the last chunk may be shorter."""
    out = []
    for start in range(0, len(samples), n):
        s = 0.0
        chunk = samples[start:start + n]
        for x in chunk:
            s += x
        out.append(s / len(chunk))
    return out


Estimator = RunningMean | TruncatedMeanState | MoMState


def absorb(state: Estimator, x) -> Estimator:
    state.absorb(x)
    return state


def truncated_mean_query(state: TruncatedMeanState, tau: float) -> float:
    return state.query(tau)


def mom_query(state: MoMState, t: int) -> float:
    return state.query(t)
