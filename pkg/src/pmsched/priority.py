"""Priority vectors and the local priority-assignment algorithm.

A priority vector gives every link a positive integer; a smaller value means
higher priority. Values may repeat across non-adjacent links.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real

from .errors import SizeLimitError
from .graph import InterferenceGraph, bits, connected_components, is_acyclic
from .regions import higher_priority_mask

BRUTE_FORCE_LIMIT = 9


@dataclass(frozen=True)
class AssignmentTrace:
    removal_order: tuple[int, ...]
    scores: tuple[Real, ...]
    assigned: tuple[int, ...]


def validate_priority(g: InterferenceGraph, p: Sequence[int]) -> tuple[int, ...]:
    """Check length, range and that adjacent links never share a value."""
    p = tuple(int(v) for v in p)
    if len(p) != g.n_links:
        raise ValueError(f"priority vector has {len(p)} entries for {g.n_links} links")
    if any(not 1 <= v <= g.n_links for v in p):
        raise ValueError(f"priority values must lie in [1, {g.n_links}]")
    for i, j in g.edges:
        if p[i] == p[j]:
            raise ValueError(f"adjacent links {i} and {j} share priority {p[i]}")
    return p


def identity_priority(n: int) -> tuple[int, ...]:
    return tuple(range(1, n + 1))


def priority_from_order(order: Sequence[int]) -> tuple[int, ...]:
    """Priority vector for a scan order (``order[0]`` gets the highest priority)."""
    p = [0] * len(order)
    for rank, i in enumerate(order):
        p[i] = rank + 1
    return tuple(p)


def scan_order(p: Sequence[int]) -> list[int]:
    """Links sorted by priority value, ties by id."""
    return sorted(range(len(p)), key=lambda i: (p[i], i))


def higher_priority_neighbors(g: InterferenceGraph, p: Sequence[int], i: int) -> frozenset[int]:
    return frozenset(bits(higher_priority_mask(g, p, i)))


def assign_priorities(g: InterferenceGraph, rates: Sequence[Real]) -> tuple[tuple[int, ...], AssignmentTrace]:
    """Local priority assignment.

    Repeatedly removes the link with the smallest rate sum over itself and its
    neighbors in the reduced graph. The removed link gets value N when none of
    its neighbors is removed yet, else one less than the smallest value among
    its removed neighbors, so it outranks all of them.

    Score ties go to the link that would receive the largest value (the least
    constrained one), then to the lowest id. This keeps the number of distinct
    levels small without affecting the min-max optimality of the result.
    """
    n = g.n_links
    if len(rates) != n:
        raise ValueError(f"rate vector has {len(rates)} entries for {n} links")
    masks = g.masks
    remaining = g.full_mask
    p = [0] * n
    scores = [rates[i] + sum((rates[j] for j in bits(masks[i])), start=0) for i in range(n)]
    order, chosen_scores, assigned = [], [], []

    def prospective(i: int) -> int:
        removed = masks[i] & ~remaining
        return min((p[j] for j in bits(removed)), default=n + 1) - 1

    while remaining:
        k = min(bits(remaining), key=lambda i: (scores[i], -prospective(i), i))
        value = prospective(k)
        p[k] = value
        order.append(k)
        chosen_scores.append(scores[k])
        assigned.append(value)
        remaining &= ~(1 << k)
        for j in bits(masks[k] & remaining):
            scores[j] = scores[j] - rates[k]
    return tuple(p), AssignmentTrace(tuple(order), tuple(chosen_scores), tuple(assigned))


def minmax_objective(g: InterferenceGraph, p: Sequence[int], rates: Sequence[Real]) -> Real:
    """Largest per-link load ``rate_i + sum of rates of higher-priority neighbors``."""
    return max(
        (rates[i] + sum((rates[j] for j in bits(higher_priority_mask(g, p, i))), start=0) for i in g.links),
        default=0,
    )


def _as_integers(rates: Sequence[Real]) -> tuple[list[int], int] | None:
    """Scale an all-rational rate vector to integers over a common denominator."""
    if not all(isinstance(r, (int, Fraction)) for r in rates):
        return None
    fracs = [Fraction(r) for r in rates]
    denom = math.lcm(*(f.denominator for f in fracs)) if fracs else 1
    return [int(f * denom) for f in fracs], denom


def brute_force_optimal_priority(
    g: InterferenceGraph, rates: Sequence[Real], limit: int = BRUTE_FORCE_LIMIT
) -> tuple[tuple[int, ...], Real]:
    """Exhaustive min-max over all permutation priority vectors.

    Returns the lexicographically smallest optimal permutation and its value.
    Rational inputs are evaluated exactly (scaled to integers).
    """
    n = g.n_links
    if n > limit:
        raise SizeLimitError(f"brute-force priority search limited to {limit} links, got {n}")
    if n == 0:
        return (), 0
    scaled = _as_integers(rates)
    weights = scaled[0] if scaled else [float(r) for r in rates]
    nbrs = [list(bits(m)) for m in g.masks]
    best_value, best_p = None, None
    for perm in itertools.permutations(range(1, n + 1)):
        worst = None
        for i in range(n):
            pi = perm[i]
            load = weights[i]
            for j in nbrs[i]:
                if perm[j] < pi:
                    load += weights[j]
            if worst is None or load > worst:
                worst = load
                if best_value is not None and worst >= best_value:
                    break
        if best_value is None or worst < best_value:
            best_value, best_p = worst, perm
    if scaled:
        return best_p, Fraction(best_value, scaled[1])
    return best_p, best_value


def tree_priority(g: InterferenceGraph) -> tuple[int, ...]:
    """Leaf-stripping priority for a forest: leaves get the lowest values, layer by layer.

    Every link ends up with at most one higher-priority neighbor (its parent).
    """
    if not is_acyclic(g):
        raise ValueError("tree_priority requires an acyclic interference graph")
    n = g.n_links
    p = [0] * n
    next_value = n
    for comp in connected_components(g):
        remaining = sum(1 << v for v in comp)
        while remaining:
            layer = [v for v in bits(remaining) if (g.masks[v] & remaining).bit_count() <= 1]
            for v in layer:
                if not remaining >> v & 1:
                    continue
                p[v] = next_value
                next_value -= 1
                remaining &= ~(1 << v)
    return tuple(p)
