"""Interference graphs over wireless links.

Vertices are links (dense ids ``0..n_links-1``); an edge means the two links
may not transmit in the same slot. Internally every graph carries one neighbor
bitmask per link, which is what the exact searches below operate on.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import ConfigError, SizeLimitError

#: Largest graph on which :func:`max_independent_set_size` will run.
MIS_LIMIT = 24
#: Largest graph whose independent sets may be listed exhaustively.
ENUMERATION_LIMIT = 20

DEFAULT_GUARD_RADIUS = 0.35


def bits(mask: int) -> Iterator[int]:
    """Yield the set bit positions of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def to_mask(links: Iterable[int]) -> int:
    mask = 0
    for i in links:
        mask |= 1 << i
    return mask


@dataclass(frozen=True)
class InterferenceGraph:
    """Undirected conflict graph; ``edges`` holds pairs ``(i, j)`` with ``i < j``."""

    n_links: int
    edges: frozenset[tuple[int, int]]
    masks: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        masks = [0] * self.n_links
        for i, j in self.edges:
            masks[i] |= 1 << j
            masks[j] |= 1 << i
        object.__setattr__(self, "masks", tuple(masks))

    @property
    def links(self) -> range:
        return range(self.n_links)

    @property
    def full_mask(self) -> int:
        return (1 << self.n_links) - 1

    def neighbors(self, i: int) -> frozenset[int]:
        return neighbors(self, i)

    def adjacent(self, i: int, j: int) -> bool:
        return bool(self.masks[i] >> j & 1)

    def degree(self, i: int) -> int:
        return self.masks[i].bit_count()

    def adjacency_matrix(self) -> np.ndarray:
        mat = np.zeros((self.n_links, self.n_links), dtype=bool)
        for i, j in self.edges:
            mat[i, j] = mat[j, i] = True
        return mat

    def edge_list(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


def build_graph(n_links: int, edges: Iterable[tuple[int, int]]) -> InterferenceGraph:
    """Build a graph from ``n_links`` and an edge list (duplicates and reversed pairs merge)."""
    if n_links < 0:
        raise ValueError(f"n_links must be non-negative, got {n_links}")
    normalized = set()
    for i, j in edges:
        i, j = int(i), int(j)
        if not (0 <= i < n_links and 0 <= j < n_links):
            raise ValueError(f"edge ({i}, {j}) has a link id outside [0, {n_links})")
        if i == j:
            raise ValueError(f"self-loop on link {i}")
        normalized.add((min(i, j), max(i, j)))
    return InterferenceGraph(n_links, frozenset(normalized))


def _check_link(g: InterferenceGraph, i: int) -> None:
    if not 0 <= i < g.n_links:
        raise ValueError(f"link id {i} outside [0, {g.n_links})")


def neighbors(g: InterferenceGraph, i: int) -> frozenset[int]:
    _check_link(g, i)
    return frozenset(bits(g.masks[i]))


def is_independent(g: InterferenceGraph, links: Iterable[int]) -> bool:
    mask = to_mask(links)
    return all(not (g.masks[i] & mask) for i in bits(mask))


def _mis_size(masks: tuple[int, ...], mask: int) -> int:
    """Exact maximum independent set size inside ``mask`` (branch and bound)."""
    memo: dict[int, int] = {}

    def solve(m: int) -> int:
        if not m:
            return 0
        if m in memo:
            return memo[m]
        # Links with at most one neighbor left can always be taken.
        for v in bits(m):
            if (masks[v] & m).bit_count() <= 1:
                result = 1 + solve(m & ~(1 << v) & ~masks[v])
                memo[m] = result
                return result
        v = max(bits(m), key=lambda u: (masks[u] & m).bit_count())
        with_v = 1 + solve(m & ~(1 << v) & ~masks[v])
        result = with_v
        rest = m & ~(1 << v)
        # Dropping v can only help if the remaining links could beat with_v.
        if rest.bit_count() > with_v:
            result = max(with_v, solve(rest))
        memo[m] = result
        return result

    return solve(mask)


def max_independent_set_size(g: InterferenceGraph, within: Iterable[int] | None = None) -> int:
    """Cardinality of a largest independent set of ``g`` (optionally of the subgraph on ``within``)."""
    mask = g.full_mask if within is None else to_mask(within)
    if mask.bit_count() > MIS_LIMIT:
        raise SizeLimitError(f"exact MIS search limited to {MIS_LIMIT} links, got {mask.bit_count()}")
    return _mis_size(g.masks, mask)


def mis_size_of_mask(g: InterferenceGraph, mask: int) -> int:
    return _mis_size(g.masks, mask)


def induced_subgraph(g: InterferenceGraph, links: Iterable[int]) -> tuple[InterferenceGraph, list[int]]:
    """Subgraph on ``links``; returns the graph and ``mapping[new_id] = old_id``."""
    mapping = sorted(set(links))
    for i in mapping:
        _check_link(g, i)
    index = {old: new for new, old in enumerate(mapping)}
    sub_edges = [(index[i], index[j]) for i, j in g.edges if i in index and j in index]
    return build_graph(len(mapping), sub_edges), mapping


def connected_components(g: InterferenceGraph) -> list[list[int]]:
    seen = 0
    components = []
    for start in g.links:
        if seen >> start & 1:
            continue
        comp = 1 << start
        frontier = comp
        while frontier:
            grown = 0
            for v in bits(frontier):
                grown |= g.masks[v]
            frontier = grown & ~comp
            comp |= frontier
        seen |= comp
        components.append(list(bits(comp)))
    return components


def is_acyclic(g: InterferenceGraph) -> bool:
    """True iff ``g`` is a forest, checked by DFS cycle detection per component."""
    parent = [-1] * g.n_links
    visited = [False] * g.n_links
    for root in g.links:
        if visited[root]:
            continue
        visited[root] = True
        stack = [root]
        while stack:
            v = stack.pop()
            for u in bits(g.masks[v]):
                if u == parent[v]:
                    continue
                if visited[u]:
                    return False
                visited[u] = True
                parent[u] = v
                stack.append(u)
    return True


def independent_sets(g: InterferenceGraph, maximal_only: bool = False) -> list[int]:
    """All (or all maximal) independent sets as bitmasks, the empty set included unless maximal."""
    if g.n_links > ENUMERATION_LIMIT:
        raise SizeLimitError(f"independent-set enumeration limited to {ENUMERATION_LIMIT} links")
    masks = g.masks
    found: list[int] = []

    def extend(chosen: int, candidates: int, start: int) -> None:
        if maximal_only:
            # chosen is maximal iff every link is chosen or blocked by a chosen neighbor
            blocked = chosen
            for v in bits(chosen):
                blocked |= masks[v]
            if blocked == g.full_mask:
                found.append(chosen)
        else:
            found.append(chosen)
        for v in bits(candidates >> start << start):
            extend(chosen | 1 << v, candidates & ~masks[v] & ~(1 << v), v + 1)

    extend(0, g.full_mask, 0)
    return sorted(found)


# -- topology generators ---------------------------------------------------


def star(k: int) -> InterferenceGraph:
    """Center link 0 conflicting with ``k`` mutually independent peripheral links."""
    if k < 1:
        raise ConfigError("star needs at least one peripheral link")
    return build_graph(k + 1, [(0, j) for j in range(1, k + 1)])


def clique_intersection(cliques: int, size: int) -> InterferenceGraph:
    """``cliques`` cliques of ``size`` links each, all sharing link 0."""
    if cliques < 1 or size < 2:
        raise ConfigError("clique_intersection needs cliques >= 1 and size >= 2")
    edges = []
    for c in range(cliques):
        members = [0] + [1 + c * (size - 1) + k for k in range(size - 1)]
        edges += [(a, b) for x, a in enumerate(members) for b in members[x + 1 :]]
    return build_graph(1 + cliques * (size - 1), edges)


def path(n: int) -> InterferenceGraph:
    if n < 1:
        raise ConfigError("path needs at least one link")
    return build_graph(n, [(i, i + 1) for i in range(n - 1)])


def random_tree(n: int, seed: int) -> InterferenceGraph:
    """Uniform random labelled tree on ``n`` links (decoded from a Prufer sequence)."""
    if n < 1:
        raise ConfigError("random_tree needs at least one link")
    if n <= 2:
        return path(n)
    rng = np.random.default_rng(seed)
    prufer = [int(x) for x in rng.integers(0, n, size=n - 2)]
    degree = [1] * n
    for x in prufer:
        degree[x] += 1
    edges = []
    for x in prufer:
        leaf = min(v for v in range(n) if degree[v] == 1)
        edges.append((leaf, x))
        degree[leaf] -= 1
        degree[x] -= 1
    u, v = (i for i in range(n) if degree[i] == 1)
    edges.append((u, v))
    return build_graph(n, edges)


@dataclass(frozen=True)
class GuardZoneLayout:
    transmitters: np.ndarray
    receivers: np.ndarray
    radius: float
    graph: InterferenceGraph


def guard_zone_layout(
    n: int,
    area: tuple[float, float] = (1.0, 1.0),
    radius: float = DEFAULT_GUARD_RADIUS,
    seed: int = 0,
) -> GuardZoneLayout:
    """Random link placement with a guard zone of ``radius`` around every receiver.

    Links i and j conflict iff i's transmitter is inside j's guard zone or j's
    transmitter is inside i's.
    """
    if n < 1 or radius <= 0 or min(area) <= 0:
        raise ConfigError("guard_zone needs n >= 1, radius > 0 and a positive area")
    rng = np.random.default_rng(seed)
    size = np.asarray(area, dtype=float)
    tx = rng.random((n, 2)) * size
    rx = rng.random((n, 2)) * size
    # dist[i, j] = |tx_i - rx_j|
    dist = np.linalg.norm(tx[:, None, :] - rx[None, :, :], axis=-1)
    inside = dist <= radius
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if inside[i, j] or inside[j, i]]
    return GuardZoneLayout(tx, rx, radius, build_graph(n, edges))


def generate_topology(spec: Mapping[str, Any]) -> InterferenceGraph:
    """Build a graph from a topology description such as ``{"kind": "star", "k": 8}``."""
    kind = spec.get("kind")
    try:
        if kind == "star":
            return star(int(spec["k"]))
        if kind == "clique_intersection":
            return clique_intersection(int(spec["cliques"]), int(spec["size"]))
        if kind == "path":
            return path(int(spec["n"]))
        if kind == "random_tree":
            return random_tree(int(spec["n"]), int(spec.get("seed", 0)))
        if kind == "guard_zone":
            area = tuple(float(x) for x in spec.get("area", (1.0, 1.0)))
            return guard_zone_layout(
                int(spec["n"]), area, float(spec.get("radius", DEFAULT_GUARD_RADIUS)), int(spec.get("seed", 0))
            ).graph
    except KeyError as exc:
        raise ConfigError(f"topology {kind!r} is missing parameter {exc}") from None
    raise ConfigError(f"unknown topology kind {kind!r}")
