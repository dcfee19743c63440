"""Schedulers: each turns an instance into a :class:`Schedule`."""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from typing import Callable

from .graphs import ConflictGraph, conflict_graph, greedy_mwis
from .instance import DemandHypergraph, StateFeedbackMatrix, hypergraph_from_sfm
from .oracles import mwis_exact
from .simulator import Policy, Schedule, Transmission, simulate


class SchedulerError(ValueError):
    """Scheduler precondition violated by the instance."""


def schedule_rlnc(a: StateFeedbackMatrix, seed: int = 0) -> Schedule:
    full = range(1, a.n_packets + 1)
    return Schedule.of([full] * max(a.w), Policy.RANDOM, seed)


def schedule_uncoded(a: StateFeedbackMatrix, order=None, seed: int = 0) -> Schedule:
    order = list(order) if order is not None else list(range(1, a.n_packets + 1))
    if sorted(order) != list(range(1, a.n_packets + 1)):
        raise SchedulerError("order must be a permutation of 1..K")
    return Schedule.of([[k] for k in order], Policy.ALL_ONES, seed)


def schedule_sidnc(a: StateFeedbackMatrix, seed: int = 0) -> Schedule:
    """Strict IDNC: colour the conflict graph, one plain sum per colour class.

    Packets are coloured greedily by descending demand (first class without a
    conflict), and classes are sent heaviest first.
    """
    g = conflict_graph(a)
    classes: list[set[int]] = []
    for v in sorted(g.weights, key=lambda v: (-g.weights[v], v)):
        for cls in classes:
            if not g.adj[v] & cls:
                cls.add(v)
                break
        else:
            classes.append({v})
    classes.sort(key=lambda c: (-g.weight(c), min(c)))
    return Schedule.of(classes, Policy.ALL_ONES, seed)


def schedule_gidnc(a: StateFeedbackMatrix, seed: int = 0) -> Schedule:
    """Heuristic generalized IDNC via greedy maximum-weight clique.

    Each round builds the IDNC graph over outstanding (receiver, packet)
    demands: two demands are compatible when they name the same packet, or
    when neither receiver still wants the other's packet. A clique is grown
    greedily by residual demand t_k (ties: lower packet, then lower
    receiver); its packets are XORed together. Any receiver left with a
    single outstanding packet in the sum is served.
    """
    residual = [set(w) for w in a.wants]
    sets = []
    while any(residual):
        demand: dict[int, int] = {}
        for w in residual:
            for k in w:
                demand[k] = demand.get(k, 0) + 1
        verts = sorted(
            ((n, k) for n, w in enumerate(residual) for k in w),
            key=lambda nk: (-demand[nk[1]], nk[1], nk[0]),
        )
        clique: list[tuple[int, int]] = []
        for n, k in verts:
            if all(
                k == k2 or (k not in residual[n2] and k2 not in residual[n])
                for n2, k2 in clique
            ):
                clique.append((n, k))
        m = {k for _, k in clique}
        sets.append(m)
        for w in residual:
            hit = w & m
            if len(hit) == 1:
                w -= hit
    return Schedule.of(sets, Policy.ALL_ONES, seed)


def _degrees(edges) -> dict[int, int]:
    deg: dict[int, int] = {}
    for e, mult in edges:
        for v in e:
            deg[v] = deg.get(v, 0) + mult
    return deg


def _vertex_cover(edges: list[tuple[frozenset[int], int]]) -> set[int]:
    """Minimal vertex cover of ``(vertex set, multiplicity)`` hyperedges."""
    deg = _degrees(edges)
    neighbours: dict[int, set[int]] = {v: set() for v in deg}
    for e, _ in edges:
        for v in e:
            neighbours[v] |= e
    rank = lambda v: (-deg[v], v)  # noqa: E731

    cover: set[int] = set()
    blocked: set[int] = set()
    for v in sorted(deg, key=rank):
        if v not in blocked:
            cover.add(v)
            blocked |= neighbours[v]
    # repair: the pass above yields a set no two of which share a hyperedge,
    # which need not touch every hyperedge
    for e, _ in edges:
        if not e & cover:
            cover.add(min(e, key=rank))
    for v in sorted(cover, key=lambda v: (deg[v], v)):
        rest = cover - {v}
        if all(e & rest for e, _ in edges):
            cover = rest
    return cover


def minimal_vertex_cover_heuristic(h: DemandHypergraph) -> set[int]:
    """Highest-degree-first vertex cover of ``h``, pruned to be minimal.

    Degree counts receivers, so a hyperedge shared by several receivers
    contributes its multiplicity.
    """
    return _vertex_cover([(e.vertices, e.multiplicity) for e in h.edges])


def vc_alg1_covers(a: StateFeedbackMatrix) -> list[set[int]]:
    """Successive disjoint covers, each removed from the hypergraph before the next."""
    h = hypergraph_from_sfm(a)
    edges = [(e.vertices, e.multiplicity) for e in h.edges]
    covers = []
    while all(e for e, _ in edges):
        vc = _vertex_cover(edges)
        covers.append(vc)
        edges = [(e - vc, mult) for e, mult in edges]
    return covers


def schedule_vc_alg1(a: StateFeedbackMatrix, seed: int = 0) -> Schedule:
    covers = vc_alg1_covers(a)
    prefix = Schedule.of(covers, Policy.RANDOM, seed)
    report = simulate(a, prefix)
    tail = max(w - trace[-1] for w, trace in zip(a.w, report.dof_trace))
    full = frozenset(range(1, a.n_packets + 1))
    return prefix.extend([Transmission(full, Policy.RANDOM)] * tail)


MIS_EXACT_THRESHOLD = 25


@dataclass
class MisPartition:
    independent: set[int]
    cover: set[int]
    n_independent_receivers: int
    exact: bool


def mis_partition(
    a: StateFeedbackMatrix, mode: str = "exact", threshold: int = MIS_EXACT_THRESHOLD
) -> MisPartition:
    if any(w != 2 for w in a.w):
        raise SchedulerError("the MIS scheme needs every receiver to want exactly 2 packets")
    if mode not in ("exact", "greedy"):
        raise SchedulerError(f"unknown MWIS mode {mode!r}")
    g: ConflictGraph = conflict_graph(a)
    exact = mode == "exact"
    if exact and len(g.weights) > threshold:
        warnings.warn(
            f"{len(g.weights)} packets exceed the exact MWIS threshold {threshold}; using greedy",
            RuntimeWarning,
            stacklevel=2,
        )
        exact = False
    independent = set(mwis_exact(g).witness) if exact else greedy_mwis(g)
    cover = set(g.weights) - independent
    return MisPartition(independent, cover, g.weight(independent), exact)


def schedule_mis(
    a: StateFeedbackMatrix, mode: str = "exact", seed: int = 0,
    threshold: int = MIS_EXACT_THRESHOLD,
) -> Schedule:
    """Two random-coded packets: first over the cover, then over every wanted packet."""
    part = mis_partition(a, mode, threshold)
    return Schedule.of([part.cover, a.wanted_packets()], Policy.RANDOM, seed)


class Kind(enum.Enum):
    RLNC = "RLNC"
    UNCODED = "UNCODED"
    S_IDNC = "S_IDNC"
    G_IDNC = "G_IDNC"
    VC_ALG1 = "VC_ALG1"
    MIS = "MIS"


@dataclass(frozen=True)
class SchedulerSpec:
    kind: Kind
    mwis_mode: str = "exact"
    threshold: int = MIS_EXACT_THRESHOLD
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.mwis_mode not in ("exact", "greedy"):
            raise SchedulerError(f"unknown MWIS mode {self.mwis_mode!r}")
        if self.threshold < 0:
            raise SchedulerError("threshold must be non-negative")

    @property
    def label(self) -> str:
        if self.kind is Kind.MIS:
            return f"MIS_{self.mwis_mode.upper()}"
        return self.kind.value

    @classmethod
    def parse(cls, name: str, mwis_mode: str = "exact") -> SchedulerSpec:
        key = name.strip().upper().replace("-", "_")
        aliases = {"MIS_EXACT": (Kind.MIS, "exact"), "MIS_GREEDY": (Kind.MIS, "greedy"),
                   "SIDNC": (Kind.S_IDNC, mwis_mode), "GIDNC": (Kind.G_IDNC, mwis_mode),
                   "VC": (Kind.VC_ALG1, mwis_mode)}
        if key in aliases:
            kind, mode = aliases[key]
            return cls(kind, mode)
        try:
            return cls(Kind(key), mwis_mode)
        except ValueError:
            raise SchedulerError(f"unknown scheduler {name!r}") from None

    def build(self, a: StateFeedbackMatrix, seed: int = 0) -> Schedule:
        if self.kind is Kind.MIS:
            return schedule_mis(a, self.mwis_mode, seed, self.threshold)
        if self.kind is Kind.UNCODED:
            return schedule_uncoded(a, self.params.get("order"), seed)
        return SIMPLE[self.kind](a, seed)


SIMPLE: dict[Kind, Callable[[StateFeedbackMatrix, int], Schedule]] = {
    Kind.RLNC: schedule_rlnc,
    Kind.S_IDNC: schedule_sidnc,
    Kind.G_IDNC: schedule_gidnc,
    Kind.VC_ALG1: schedule_vc_alg1,
}
