"""Shared graphs and generators for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from gridnoise.netgraph import Network
from gridnoise.validate import random_connected_network


@pytest.fixture
def two_node() -> Network:
    return Network(n=2, edges=((0, 1, 1.0),))


@pytest.fixture
def k3() -> Network:
    return Network(n=3, edges=((0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)))


@pytest.fixture
def c4() -> Network:
    return Network(n=4, edges=((0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)))


@pytest.fixture
def path4() -> Network:
    return Network(n=4, edges=((0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)))


@pytest.fixture
def star5() -> Network:
    return Network(n=5, edges=tuple((0, k, 1.0) for k in range(1, 5)))


def random_tree(rng: np.random.Generator, n: int, lo: float = 0.6, hi: float = 1.8) -> Network:
    edges = []
    order = rng.permutation(n)
    for k in range(1, n):
        i, j = int(order[k]), int(order[int(rng.integers(0, k))])
        edges.append((i, j, float(rng.uniform(lo, hi))))
    return Network(n=n, edges=tuple(edges))


__all__ = ["random_connected_network", "random_tree"]
