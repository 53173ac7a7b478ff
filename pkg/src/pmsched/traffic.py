"""Packet arrival processes and arrival-rate estimation.

Slots are numbered from 1. ``block(t, length, rng)`` returns the arrivals at
the end of slots ``t .. t+length-1`` as an integer array of shape
``(length, n_links)``; for the i.i.d. processes the random stream is consumed
row by row, so splitting a horizon into blocks does not change the sample path.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real

import numpy as np

from .errors import ConfigError
from .graph import InterferenceGraph, bits
from .regions import higher_priority_mask


def _check_rates(rates: Sequence[Real]) -> None:
    if any(not 0 <= r <= 1 for r in rates):
        raise ConfigError("arrival rates must lie in [0, 1]")


@dataclass(frozen=True)
class BernoulliArrivals:
    """Each link independently receives one packet per slot with probability ``rates[i]``."""

    rates: tuple[Real, ...]

    def __post_init__(self) -> None:
        _check_rates(self.rates)

    @property
    def n_links(self) -> int:
        return len(self.rates)

    @property
    def a_max(self) -> int:
        return 1

    def mean_rates(self) -> tuple[Real, ...]:
        return self.rates

    def block(self, t: int, length: int, rng: np.random.Generator) -> np.ndarray:
        probs = np.array([float(r) for r in self.rates])
        return (rng.random((length, self.n_links)) < probs).astype(np.int64)


@dataclass(frozen=True)
class BatchArrivals:
    """i.i.d. Binomial(a_max, rate/a_max) batches: mean ``rate``, never more than ``a_max``."""

    rates: tuple[Real, ...]
    a_max: int

    def __post_init__(self) -> None:
        _check_rates(self.rates)
        if self.a_max < 1:
            raise ConfigError("a_max must be at least 1")

    @property
    def n_links(self) -> int:
        return len(self.rates)

    def mean_rates(self) -> tuple[Real, ...]:
        return self.rates

    def block(self, t: int, length: int, rng: np.random.Generator) -> np.ndarray:
        probs = np.array([float(r) for r in self.rates]) / self.a_max
        return rng.binomial(self.a_max, probs, size=(length, self.n_links)).astype(np.int64)


@dataclass(frozen=True)
class PeriodicArrivals:
    """Deterministic cyclic pattern: slot t receives ``pattern[t % period]``."""

    pattern: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if not self.pattern or len({len(row) for row in self.pattern}) != 1:
            raise ConfigError("pattern must be a non-empty list of equal-length rows")
        if any(x < 0 for row in self.pattern for x in row):
            raise ConfigError("pattern entries must be non-negative")

    @property
    def n_links(self) -> int:
        return len(self.pattern[0])

    @property
    def a_max(self) -> int:
        return max(max(row) for row in self.pattern)

    def mean_rates(self) -> tuple[Fraction, ...]:
        period = len(self.pattern)
        return tuple(Fraction(sum(row[i] for row in self.pattern), period) for i in range(self.n_links))

    def block(self, t: int, length: int, rng: np.random.Generator) -> np.ndarray:
        pattern = np.array(self.pattern, dtype=np.int64)
        return pattern[np.arange(t, t + length) % len(self.pattern)]


@dataclass(frozen=True)
class AdversarialArrivals:
    """Starvation process: feeder ``j`` gets a packet every odd slot, ``k`` every even
    slot, and ``target`` gets Bernoulli(epsilon) packets. Other links stay silent."""

    n: int
    target: int
    feeders: tuple[int, int]
    epsilon: float = 0.1

    def __post_init__(self) -> None:
        if not 0 <= self.epsilon <= 1:
            raise ConfigError("epsilon must lie in [0, 1]")

    @property
    def n_links(self) -> int:
        return self.n

    @property
    def a_max(self) -> int:
        return 1

    def mean_rates(self) -> tuple[Real, ...]:
        rates: list[Real] = [0] * self.n
        rates[self.feeders[0]] = rates[self.feeders[1]] = Fraction(1, 2)
        rates[self.target] = self.epsilon
        return tuple(rates)

    def block(self, t: int, length: int, rng: np.random.Generator) -> np.ndarray:
        out = np.zeros((length, self.n), dtype=np.int64)
        slots = np.arange(t, t + length)
        j, k = self.feeders
        out[:, j] = slots % 2 == 1
        out[:, k] = slots % 2 == 0
        out[:, self.target] = rng.random(length) < self.epsilon
        return out


ArrivalProcess = BernoulliArrivals | BatchArrivals | PeriodicArrivals | AdversarialArrivals


def next_arrivals(spec: ArrivalProcess, t: int, rng: np.random.Generator) -> np.ndarray:
    """Arrivals at the end of slot ``t``."""
    return spec.block(t, 1, rng)[0]


def make_starvation_arrivals(g: InterferenceGraph, p: Sequence[int], epsilon: float = 0.1) -> AdversarialArrivals:
    """Starve some link under priority ``p``.

    Picks the lowest-id link ``i`` with two non-adjacent higher-priority
    neighbors ``j < k`` (lexicographically first pair). Raises ``ValueError``
    when no such triple exists, i.e. every link's higher-priority neighborhood
    is a clique.
    """
    for i in g.links:
        higher = list(bits(higher_priority_mask(g, p, i)))
        for a, j in enumerate(higher):
            for k in higher[a + 1 :]:
                if not g.adjacent(j, k):
                    return AdversarialArrivals(g.n_links, i, (j, k), epsilon)
    raise ValueError("no link has two independent higher-priority neighbors; the construction does not apply")


@dataclass
class CumulativeCounters:
    arrivals: np.ndarray
    departures: np.ndarray
    t: int = 0


def estimate_rates(
    counters: CumulativeCounters | Sequence[int], frame: int, frame_length: int
) -> tuple[Fraction, ...]:
    """Estimate used at the start of ``frame``: ``A((frame-1)T) / ((frame-1)T)``.

    ``counters`` must be the cumulative arrivals at the end of slot ``(frame-1)T``
    (a bare sequence of counts is taken to be exactly that snapshot).
    """
    if frame < 2:
        raise ValueError("no rate estimate is defined before the second frame")
    elapsed = (frame - 1) * frame_length
    if isinstance(counters, CumulativeCounters):
        if counters.t != elapsed:
            raise ValueError(f"counters are at slot {counters.t}, the estimate needs slot {elapsed}")
        counters = counters.arrivals
    return tuple(Fraction(int(a), elapsed) for a in counters)
