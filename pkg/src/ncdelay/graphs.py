"""Packet conflict graph and a greedy independent-set search."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .instance import StateFeedbackMatrix


@dataclass(frozen=True)
class ConflictGraph:
    """Packets joined when some receiver wants both.

    Only packets wanted by at least one receiver appear as vertices. For
    instances where every receiver wants two packets this is exactly the
    demand graph, one edge per distinct want-set.
    """

    weights: dict[int, int]
    adj: dict[int, frozenset[int]]

    @property
    def vertices(self) -> list[int]:
        return sorted(self.weights)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return sorted((u, v) for u in self.adj for v in self.adj[u] if u < v)

    def is_independent(self, vs) -> bool:
        vs = set(vs)
        return all(not (self.adj[v] & vs) for v in vs)

    def weight(self, vs) -> int:
        return sum(self.weights[v] for v in vs)

    @classmethod
    def from_edges(cls, weights: dict[int, int], edges) -> ConflictGraph:
        adj = {v: set() for v in weights}
        for u, v in edges:
            if u == v:
                raise ValueError("self-loop")
            adj[u].add(v)
            adj[v].add(u)
        return cls(dict(weights), {v: frozenset(n) for v, n in adj.items()})


def conflict_graph(a: StateFeedbackMatrix) -> ConflictGraph:
    t = a.t
    weights = {k: t[k - 1] for k in a.wanted_packets()}
    edges = {pair for w in a.wants for pair in itertools.combinations(sorted(w), 2)}
    return ConflictGraph.from_edges(weights, edges)


def greedy_mwis(g: ConflictGraph) -> set[int]:
    """Greedy clique growth on the complement graph.

    Start from the heaviest vertex and keep adding the heaviest vertex that is
    adjacent, in the complement, to everything chosen so far. Ties go to the
    lower packet index. The result is a maximal independent set of ``g``.
    """
    order = sorted(g.weights, key=lambda v: (-g.weights[v], v))
    everyone = frozenset(g.weights)
    chosen: set[int] = set()
    candidates = set(everyone)
    for v in order:
        if v not in candidates:
            continue
        chosen.add(v)
        complement_nbrs = everyone - g.adj[v] - {v}
        candidates &= complement_nbrs
    return chosen
