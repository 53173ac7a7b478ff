"""Stability-region membership and interference-degree metrics.

Rates may be floats or :class:`fractions.Fraction`. Constraint sums made only
of rationals are compared exactly; anything involving a float is compared as
``<= 1 + TOLERANCE``.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real

import numpy as np

from .errors import SizeLimitError
from .graph import (
    InterferenceGraph,
    bits,
    independent_sets,
    mis_size_of_mask,
)

TOLERANCE = 1e-12
DELTA_SP_LIMIT = 12
SP_ORACLE_LIMIT = 16


def within_unit(x: Real) -> bool:
    if isinstance(x, (int, Fraction)):
        return x <= 1
    return float(x) <= 1 + TOLERANCE


def _check_rates(g: InterferenceGraph, rates: Sequence[Real]) -> None:
    if len(rates) != g.n_links:
        raise ValueError(f"rate vector has {len(rates)} entries for {g.n_links} links")


def _check_priority(g: InterferenceGraph, p: Sequence[int]) -> None:
    if len(p) != g.n_links:
        raise ValueError(f"priority vector has {len(p)} entries for {g.n_links} links")


@dataclass(frozen=True)
class Membership:
    """Outcome of a region test; truthy iff the rate vector is inside."""

    inside: bool
    violated: tuple[int, ...] = ()
    witness: tuple[int, ...] | None = None

    def __bool__(self) -> bool:
        return self.inside


@dataclass(frozen=True)
class DegreeReport:
    per_link: tuple[int, ...]
    overall: int


def _load(rates: Sequence[Real], i: int, mask: int) -> Real:
    total = rates[i]
    for j in bits(mask):
        total = total + rates[j]
    return total


def in_lambda_wc(g: InterferenceGraph, rates: Sequence[Real]) -> Membership:
    """Every link's closed-neighborhood rate sum is at most one."""
    _check_rates(g, rates)
    bad = tuple(i for i in g.links if not within_unit(_load(rates, i, g.masks[i])))
    return Membership(not bad, bad)


def higher_priority_mask(g: InterferenceGraph, p: Sequence[int], i: int) -> int:
    mask = 0
    for j in bits(g.masks[i]):
        if p[j] < p[i]:
            mask |= 1 << j
    return mask


def in_lambda_p(g: InterferenceGraph, p: Sequence[int], rates: Sequence[Real]) -> Membership:
    """Every link's rate plus its strictly-higher-priority neighbors' rates is at most one."""
    _check_rates(g, rates)
    _check_priority(g, p)
    bad = tuple(i for i in g.links if not within_unit(_load(rates, i, higher_priority_mask(g, p, i))))
    return Membership(not bad, bad)


def interference_degree(g: InterferenceGraph) -> DegreeReport:
    """Per link: MIS size of the closed neighborhood; overall: the network maximum."""
    per_link = tuple(mis_size_of_mask(g, g.masks[i] | 1 << i) for i in g.links)
    return DegreeReport(per_link, max(per_link, default=0))


def prioritized_interference_degree(g: InterferenceGraph, p: Sequence[int]) -> DegreeReport:
    _check_priority(g, p)
    per_link = tuple(mis_size_of_mask(g, higher_priority_mask(g, p, i) | 1 << i) for i in g.links)
    return DegreeReport(per_link, max(per_link, default=0))


def _order_to_priority(removal_order: Sequence[int]) -> tuple[int, ...]:
    """Priority vector from an elimination order (first eliminated = lowest priority)."""
    n = len(removal_order)
    p = [0] * n
    for rank, i in enumerate(removal_order):
        p[i] = n - rank
    return tuple(p)


def delta_sp(g: InterferenceGraph, limit: int = DELTA_SP_LIMIT) -> tuple[int, tuple[int, ...]]:
    """Minimum prioritized interference degree over all priority orders, with a witness.

    Links are eliminated lowest-priority first; an eliminated link's cost is the
    MIS size of itself plus its still-present neighbors. The cost depends only on
    the remaining set, so the search memoizes on it and prunes any branch whose
    running maximum already reaches the incumbent.
    """
    n = g.n_links
    if n > limit:
        raise SizeLimitError(f"delta_sp search limited to {limit} links, got {n}")
    if n == 0:
        return 0, ()
    masks = g.masks
    mis_cache: dict[int, int] = {}

    def cost(i: int, remaining: int) -> int:
        m = (masks[i] & remaining) | 1 << i
        if m not in mis_cache:
            mis_cache[m] = mis_size_of_mask(g, m)
        return mis_cache[m]

    upper, greedy_p = delta_sp_greedy(g)
    # best[remaining] = (value, first link to eliminate) for the exact subproblem
    best: dict[int, tuple[int, int]] = {0: (0, -1)}

    def solve(remaining: int, bound: int) -> int:
        """Optimal value for ``remaining`` if it is below ``bound``, else some value >= bound."""
        if remaining in best:
            return best[remaining][0]
        result, choice = bound, -1
        for i in sorted(bits(remaining), key=lambda v: cost(v, remaining)):
            c = cost(i, remaining)
            if c >= result:
                break
            sub = solve(remaining & ~(1 << i), result)
            value = max(c, sub)
            if value < result:
                result, choice = value, i
        if choice >= 0:
            best[remaining] = (result, choice)
        return result

    value = solve(g.full_mask, upper)
    if value >= upper:
        return upper, greedy_p
    order = []
    remaining = g.full_mask
    while remaining:
        i = best[remaining][1]
        order.append(i)
        remaining &= ~(1 << i)
    return value, _order_to_priority(order)


def delta_sp_greedy(g: InterferenceGraph) -> tuple[int, tuple[int, ...]]:
    """Upper bound on delta_sp: repeatedly eliminate the link whose remaining closed
    neighborhood has the smallest MIS (ties by lowest id). Not guaranteed optimal."""
    remaining = g.full_mask
    order = []
    worst = 0
    while remaining:
        costs = {i: mis_size_of_mask(g, (g.masks[i] & remaining) | 1 << i) for i in bits(remaining)}
        i = min(costs, key=lambda v: (costs[v], v))
        worst = max(worst, costs[i])
        order.append(i)
        remaining &= ~(1 << i)
    return worst, _order_to_priority(order)


def convex_combination(g: InterferenceGraph, sets: Sequence[int], weights: Sequence[Real]) -> list[Real]:
    """Weighted sum of independent-set indicator vectors (sets given as bitmasks)."""
    rates: list[Real] = [0] * g.n_links
    for mask, w in zip(sets, weights):
        for i in bits(mask):
            rates[i] = rates[i] + w
    return rates


def sample_lambda_opt(
    g: InterferenceGraph,
    rng: np.random.Generator,
    scale: float = 1.0,
    maximal_only: bool = True,
) -> np.ndarray:
    """Random point of ``scale`` times the convex hull of independent sets.

    Weights are Dirichlet(1) over the maximal independent sets by default; those
    points sit on the outer part of the hull, which is where bounds are tight.
    """
    if not 0 < scale <= 1:
        raise ValueError("scale must lie in (0, 1]")
    sets = independent_sets(g, maximal_only=maximal_only)
    weights = rng.dirichlet(np.ones(len(sets)))
    rates = np.zeros(g.n_links)
    for mask, w in zip(sets, weights):
        for i in bits(mask):
            rates[i] += w
    return scale * rates


def in_lambda_sp_oracle(g: InterferenceGraph, rates: Sequence[Real], limit: int = SP_ORACLE_LIMIT) -> Membership:
    """Is there any priority order p with ``rates`` in Lambda_p?

    Exhaustive over orders, built highest priority first: a link's constraint
    only depends on which links were placed before it, so feasibility is
    memoized on the placed set (equivalent to trying all n! permutations).
    """
    _check_rates(g, rates)
    n = g.n_links
    if n > limit:
        raise SizeLimitError(f"Lambda_sp oracle limited to {limit} links, got {n}")
    masks = g.masks
    # reachable[placed] = last link placed on some feasible path to this set
    reachable: dict[int, int] = {0: -1}
    frontier = [0]
    for _ in range(n):
        grown = []
        for placed in frontier:
            for i in bits(g.full_mask & ~placed):
                nxt = placed | 1 << i
                if nxt in reachable:
                    continue
                if within_unit(_load(rates, i, masks[i] & placed)):
                    reachable[nxt] = i
                    grown.append(nxt)
        frontier = grown
    if g.full_mask not in reachable:
        return Membership(False)
    order = []
    placed = g.full_mask
    while placed:
        i = reachable[placed]
        order.append(i)
        placed &= ~(1 << i)
    # order is lowest priority first
    return Membership(True, witness=_order_to_priority(order))
