"""Per-slot schedulers.

Every scheduler takes the current queue lengths and returns the set of links
that transmit one packet this slot. All of them are pure functions.
"""

from __future__ import annotations

from collections.abc import Sequence

from .errors import SizeLimitError
from .graph import ENUMERATION_LIMIT, InterferenceGraph, bits, independent_sets
from .priority import scan_order


def _greedy_scan(g: InterferenceGraph, order: Sequence[int], queues: Sequence[int]) -> frozenset[int]:
    masks = g.masks
    selected = 0
    for i in order:
        if queues[i] > 0 and not masks[i] & selected:
            selected |= 1 << i
    return frozenset(bits(selected))


def schedule_priority_maximal(g: InterferenceGraph, p: Sequence[int], queues: Sequence[int]) -> frozenset[int]:
    """Scan links by priority value (ties by id); take each backlogged link not blocked yet."""
    return _greedy_scan(g, scan_order(p), queues)


def schedule_fixed_maximal(g: InterferenceGraph, order: Sequence[int], queues: Sequence[int]) -> frozenset[int]:
    if sorted(order) != list(range(g.n_links)):
        raise ValueError("order must be a permutation of the link ids")
    return _greedy_scan(g, order, queues)


def lqf_order(queues: Sequence[int]) -> list[int]:
    return sorted(range(len(queues)), key=lambda i: (-queues[i], i))


def schedule_lqf(g: InterferenceGraph, queues: Sequence[int]) -> frozenset[int]:
    """Longest queue first: a maximal scan in decreasing queue length, ties by id."""
    return _greedy_scan(g, lqf_order(queues), queues)


def lex_key(mask: int, n: int) -> int:
    """Integer whose order matches lexicographic order of the indicator vector of ``mask``."""
    key = 0
    for i in bits(mask):
        key |= 1 << (n - 1 - i)
    return key


def schedule_max_weight(
    g: InterferenceGraph,
    queues: Sequence[int],
    candidates: Sequence[int] | None = None,
) -> frozenset[int]:
    """Independent set of backlogged links with the largest total queue length.

    Ties go to the lexicographically smallest indicator vector. ``candidates``
    may pass precomputed maximal independent sets (bitmasks) to skip enumeration.
    """
    if candidates is None:
        if g.n_links > ENUMERATION_LIMIT:
            raise SizeLimitError(f"max-weight search limited to {ENUMERATION_LIMIT} links")
        candidates = independent_sets(g, maximal_only=True)
    backlogged = sum(1 << i for i in g.links if queues[i] > 0)
    best = (-1, 0)
    chosen = 0
    for mask in candidates:
        s = mask & backlogged
        weight = sum(queues[i] for i in bits(s))
        key = (weight, -lex_key(s, g.n_links))
        if key > best:
            best, chosen = key, s
    return frozenset(bits(chosen))


def is_maximal(g: InterferenceGraph, schedule: frozenset[int], queues: Sequence[int]) -> bool:
    """No backlogged link outside ``schedule`` could be added without a conflict."""
    mask = sum(1 << i for i in schedule)
    return all(
        i in schedule or queues[i] <= 0 or g.masks[i] & mask
        for i in g.links
    )


def departure_violations(
    g: InterferenceGraph,
    order: Sequence[int],
    queues: Sequence[int],
    schedule: frozenset[int],
) -> list[int]:
    """Backlogged links i with no scheduled link among i and its neighbors scanned before i."""
    rank = {link: r for r, link in enumerate(order)}
    mask = sum(1 << i for i in schedule)
    bad = []
    for i in g.links:
        if queues[i] <= 0 or mask >> i & 1:
            continue
        if not any(mask >> j & 1 for j in bits(g.masks[i]) if rank[j] < rank[i]):
            bad.append(i)
    return bad
