from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from pmsched.graph import build_graph, clique_intersection, star  # noqa: E402


def random_graph(rng: np.random.Generator, n: int, density: float | None = None):
    density = rng.uniform(0.15, 0.7) if density is None else density
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < density]
    return build_graph(n, edges)


@st.composite
def graphs(draw, min_n: int = 1, max_n: int = 8):
    n = draw(st.integers(min_n, max_n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True) if pairs else st.just([]))
    return build_graph(n, chosen)


@pytest.fixture
def star8():
    return star(8)


@pytest.fixture
def two_clique():
    return clique_intersection(2, 6)
