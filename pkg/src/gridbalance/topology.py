"""Communication graphs among buildings.

Buildings exchange values only with their graph neighbours, so every
consensus operation downstream is driven by a :class:`Graph`. Graphs are
immutable; changing the topology means starting a new run.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np

from .errors import TopologyError

__all__ = ["Graph", "KINDS", "generate", "is_connected", "laplacian"]

KINDS = ("ring", "path", "complete", "erdos_renyi", "grid2d")
MAX_ER_ATTEMPTS = 1000


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on nodes ``0..n-1``.

    Attributes:
        n: Number of buildings.
        edges: Sorted tuple of ``(i, j)`` pairs with ``i < j``.
    """

    n: int
    edges: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"graph needs at least one node, got n={self.n}")
        normalized = set()
        for i, j in self.edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-loop on node {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={self.n}")
            pair = (min(i, j), max(i, j))
            if pair in normalized:
                raise ValueError(f"duplicate edge {pair}")
            normalized.add(pair)
        object.__setattr__(self, "edges", tuple(sorted(normalized)))

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return tuple(tuple(sorted(a)) for a in adj)

    def degree(self, node: int) -> int:
        return len(self.neighbors[node])


def is_connected(g: Graph) -> bool:
    """Breadth-first search from node 0; True iff every node is reached."""
    seen = {0}
    queue = deque([0])
    while queue:
        cur = queue.popleft()
        for nb in g.neighbors[cur]:
            if nb not in seen:
                seen.add(nb)
                queue.append(nb)
    return len(seen) == g.n


def laplacian(g: Graph) -> np.ndarray:
    """Return ``L = D - A`` as a float array with integer entries."""
    lap = np.zeros((g.n, g.n))
    for i, j in g.edges:
        lap[i, j] = lap[j, i] = -1.0
        lap[i, i] += 1.0
        lap[j, j] += 1.0
    return lap


def _grid_shape(n: int) -> tuple[int, int]:
    rows = max(r for r in range(1, math.isqrt(n) + 1) if n % r == 0)
    return rows, n // rows


def _erdos_renyi(n: int, p: float, seed: int) -> Graph:
    for attempt in range(MAX_ER_ATTEMPTS):
        rng = np.random.default_rng(seed + attempt)
        draws = rng.random(n * (n - 1) // 2)
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        g = Graph(n, tuple(pr for pr, u in zip(pairs, draws) if u < p))
        if is_connected(g):
            return g
    raise TopologyError(
        f"no connected erdos_renyi(n={n}, p={p}) graph after {MAX_ER_ATTEMPTS} attempts"
    )


def generate(kind: str, n: int, seed: int = 0, p: float | None = None) -> Graph:
    """Build a connected graph of the given kind.

    Args:
        kind: One of :data:`KINDS`.
        n: Number of nodes, at least 2.
        seed: Only used by ``erdos_renyi``; attempt ``k`` uses ``seed + k``.
        p: Edge probability for ``erdos_renyi``, in ``(0, 1]``.

    ``grid2d`` lays the nodes out row-major on the most square
    ``rows x cols`` factorisation of ``n`` (a prime ``n`` degenerates to a path).
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if kind == "ring":
        edges = [(i, i + 1) for i in range(n - 1)]
        if n > 2:
            edges.append((0, n - 1))
    elif kind == "path":
        edges = [(i, i + 1) for i in range(n - 1)]
    elif kind == "complete":
        edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    elif kind == "grid2d":
        rows, cols = _grid_shape(n)
        edges = []
        for r in range(rows):
            for c in range(cols):
                node = r * cols + c
                if c + 1 < cols:
                    edges.append((node, node + 1))
                if r + 1 < rows:
                    edges.append((node, node + cols))
    elif kind == "erdos_renyi":
        if p is None or not (0.0 < p <= 1.0):
            raise ValueError(f"erdos_renyi needs 0 < p <= 1, got {p}")
        return _erdos_renyi(n, p, seed)
    else:
        raise ValueError(f"unknown topology kind {kind!r}; expected one of {KINDS}")
    return Graph(n, tuple(edges))
