"""Communication graphs for the decentralized protocols.

Graphs are undirected, immutable after construction, and free of self-loops.
Edges are stored as (i, j) tuples with i < j.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class TopologyGraph:
    p: int
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.p < 1:
            raise ValueError("empty graph")
        norm = set()
        for e in self.edges:
            i, j = e
            if i == j:
                raise ValueError("self-loop")
            if not (0 <= i < self.p and 0 <= j < self.p):
                raise ValueError("edge endpoint out of range")
            norm.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(norm))

    def degree(self, i: int) -> int:
        return len(neighbors(self, i))


def complete_graph(p: int) -> TopologyGraph:
    if p < 1:
        raise ValueError("empty graph")
    return TopologyGraph(p, frozenset((i, j) for i in range(p) for j in range(i + 1, p)))


def ring_graph(p: int) -> TopologyGraph:
    """Cycle over 0..p-1. Degenerate sizes: p=1 has no edges, p=2 one edge."""
    if p < 1:
        raise ValueError("empty graph")
    if p == 1:
        return TopologyGraph(1)
    if p == 2:
        return TopologyGraph(2, frozenset({(0, 1)}))
    return TopologyGraph(p, frozenset((i, (i + 1) % p) for i in range(p)))


def star_graph(p: int, hub: int = 0) -> TopologyGraph:
    if p < 2:
        raise ValueError("star graph needs p >= 2")
    if not 0 <= hub < p:
        raise ValueError("hub out of range")
    return TopologyGraph(p, frozenset((hub, i) for i in range(p) if i != hub))


def neighbors(g: TopologyGraph, i: int) -> list[int]:
    """Sorted neighbor ids of node ``i`` (never includes ``i`` itself)."""
    if not 0 <= i < g.p:
        raise ValueError("node out of range")
    out = []
    for a, b in g.edges:
        if a == i:
            out.append(b)
        elif b == i:
            out.append(a)
    return sorted(out)


def round_message_count(g: TopologyGraph, n: int) -> int:
    """Scalars exchanged in one decentralized round: each client sends its
    length-n vector plus one eigenvalue to every neighbor, so the total is
    sum_i deg(i) * (n + 1) = 2 |E| (n + 1).
    """
    return 2 * len(g.edges) * (n + 1)
