"""Problem instances: state feedback matrices and their demand hypergraphs.

Packets are numbered 1..K everywhere (file formats included). Receivers are
plain list positions 0..N-1; anything user-facing adds one.
"""

from __future__ import annotations

import itertools
import random
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence


class InstanceError(ValueError):
    """Raised when an instance violates the model invariants."""


class ParseError(InstanceError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class StateFeedbackMatrix:
    """N x K binary demand matrix stored as one want-set per receiver."""

    n_packets: int
    wants: tuple[frozenset[int], ...]

    def __post_init__(self):
        if self.n_packets < 1:
            raise InstanceError("an instance needs at least one packet")
        if not self.wants:
            raise InstanceError("an instance needs at least one receiver")
        wants = tuple(frozenset(w) for w in self.wants)
        for n, w in enumerate(wants):
            if not w:
                raise InstanceError(f"receiver {n + 1} wants nothing")
            bad = [k for k in w if not 1 <= k <= self.n_packets]
            if bad:
                raise InstanceError(
                    f"receiver {n + 1} wants packet {min(bad)} outside 1..{self.n_packets}"
                )
        object.__setattr__(self, "wants", wants)

    @classmethod
    def from_wants(cls, n_packets: int, wants: Iterable[Iterable[int]]) -> StateFeedbackMatrix:
        return cls(n_packets, tuple(frozenset(w) for w in wants))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> StateFeedbackMatrix:
        if not rows:
            raise InstanceError("an instance needs at least one receiver")
        k = len(rows[0])
        if any(len(r) != k for r in rows):
            raise InstanceError("rows have different lengths")
        return cls(k, tuple(frozenset(j + 1 for j, v in enumerate(r) if v) for r in rows))

    @property
    def n_receivers(self) -> int:
        return len(self.wants)

    @property
    def w(self) -> tuple[int, ...]:
        """Number of wanted packets per receiver."""
        return tuple(len(x) for x in self.wants)

    @property
    def t(self) -> tuple[int, ...]:
        """t[k-1] is the number of receivers wanting packet k."""
        counts = Counter(k for w in self.wants for k in w)
        return tuple(counts[k] for k in range(1, self.n_packets + 1))

    def rows(self) -> list[list[int]]:
        return [[int(k in w) for k in range(1, self.n_packets + 1)] for w in self.wants]

    def wanted_packets(self) -> list[int]:
        """Packets wanted by at least one receiver, ascending."""
        return sorted(set().union(*self.wants))

    def sum_w(self) -> int:
        return sum(self.w)

    def lower_bound(self) -> Fraction:
        w = self.w
        return Fraction(sum(x * x for x in w), 2 * sum(w)) + Fraction(1, 2)

    def rlnc_apdd(self) -> Fraction:
        w = self.w
        return Fraction(sum(x * x for x in w), sum(w))


@dataclass(frozen=True)
class HyperEdge:
    vertices: frozenset[int]
    receivers: tuple[int, ...]

    @property
    def multiplicity(self) -> int:
        return len(self.receivers)


@dataclass(frozen=True)
class DemandHypergraph:
    """Packets as vertices, distinct want-sets as hyperedges.

    Receivers sharing a want-set collapse into one hyperedge whose
    ``receivers`` lists them; the receiver lists of all hyperedges together
    enumerate 0..N-1 exactly once.
    """

    n_vertices: int
    edges: tuple[HyperEdge, ...]

    def __post_init__(self):
        if self.n_vertices < 1 or not self.edges:
            raise InstanceError("a hypergraph needs at least one vertex and one hyperedge")
        seen_sets = set()
        receivers = []
        for e in self.edges:
            if not e.vertices:
                raise InstanceError("empty hyperedge: a receiver would want nothing")
            if not all(1 <= v <= self.n_vertices for v in e.vertices):
                raise InstanceError("hyperedge references an unknown vertex")
            if e.vertices in seen_sets:
                raise InstanceError("duplicate hyperedge; merge it into the multiplicity")
            if not e.receivers:
                raise InstanceError("hyperedge with zero multiplicity")
            seen_sets.add(e.vertices)
            receivers.extend(e.receivers)
        if sorted(receivers) != list(range(len(receivers))):
            raise InstanceError("hyperedge receiver lists must enumerate 0..N-1 once")

    @classmethod
    def from_edges(cls, n_vertices: int, edges: Iterable[Iterable[int]]) -> DemandHypergraph:
        """Build from a list of hyperedges; repeated sets become multiplicity."""
        groups: dict[frozenset[int], list[int]] = {}
        for n, e in enumerate(edges):
            groups.setdefault(frozenset(e), []).append(n)
        return cls(n_vertices, tuple(HyperEdge(v, tuple(r)) for v, r in groups.items()))

    @property
    def n_receivers(self) -> int:
        return sum(e.multiplicity for e in self.edges)

    @property
    def weights(self) -> dict[int, int]:
        """Vertex weight t_k: multiplicity-weighted hyperedge count."""
        wt = dict.fromkeys(range(1, self.n_vertices + 1), 0)
        for e in self.edges:
            for v in e.vertices:
                wt[v] += e.multiplicity
        return wt

    def uniformity(self) -> int | None:
        sizes = {len(e.vertices) for e in self.edges}
        return sizes.pop() if len(sizes) == 1 else None

    def edge_multiset(self) -> Counter:
        return Counter({e.vertices: e.multiplicity for e in self.edges})


def hypergraph_from_sfm(a: StateFeedbackMatrix) -> DemandHypergraph:
    return DemandHypergraph.from_edges(a.n_packets, a.wants)


def sfm_from_hypergraph(h: DemandHypergraph) -> StateFeedbackMatrix:
    wants: list[frozenset[int] | None] = [None] * h.n_receivers
    for e in h.edges:
        for n in e.receivers:
            wants[n] = e.vertices
    return StateFeedbackMatrix(h.n_vertices, tuple(wants))


# --- generators -----------------------------------------------------------

MAX_REDRAWS = 10_000


def gen_bernoulli(n: int, k: int, p: float, seed: int) -> StateFeedbackMatrix:
    """Each cell wanted independently with probability p; empty rows redrawn."""
    if not 0.0 <= p <= 1.0:
        raise InstanceError(f"probability {p} outside [0, 1]")
    if p == 0.0:
        raise InstanceError("p = 0 can never produce a non-empty want-set")
    rng = random.Random(seed)
    wants = []
    for _ in range(n):
        for _attempt in range(MAX_REDRAWS):
            row = frozenset(j for j in range(1, k + 1) if rng.random() < p)
            if row:
                wants.append(row)
                break
        else:
            raise InstanceError(f"no non-empty want-set after {MAX_REDRAWS} draws (p={p})")
    return StateFeedbackMatrix(k, tuple(wants))


def gen_uniform_pairs(n: int, k: int, seed: int) -> StateFeedbackMatrix:
    if k < 2:
        raise InstanceError("uniform pairs need at least two packets")
    rng = random.Random(seed)
    return StateFeedbackMatrix(
        k, tuple(frozenset(rng.sample(range(1, k + 1), 2)) for _ in range(n))
    )


def gen_complete_graph_instance(k: int) -> StateFeedbackMatrix:
    """One receiver per unordered packet pair."""
    if k < 2:
        raise InstanceError("complete-graph instance needs k >= 2")
    return StateFeedbackMatrix(
        k, tuple(frozenset(pair) for pair in itertools.combinations(range(1, k + 1), 2))
    )


def is_efl_shape(a: StateFeedbackMatrix) -> bool:
    """r receivers, each wanting r packets, pairwise sharing at most one."""
    r = a.n_receivers
    if r < 2 or any(x != r for x in a.w):
        return False
    return all(len(x & y) <= 1 for x, y in itertools.combinations(a.wants, 2))


def gen_efl_instance(r: int, seed: int, share_prob: float = 0.5, retries: int = 100) -> StateFeedbackMatrix:
    """Random instance of the Erdos-Faber-Lovasz shape.

    Receivers are placed one at a time. Each reuses already-placed packets
    (with probability ``share_prob`` per candidate) as long as no earlier
    receiver would share two packets with it, then tops up with fresh packets.
    Unused packet labels are compacted away.
    """
    if r < 2:
        raise InstanceError("need r >= 2")
    rng = random.Random(seed)
    for _ in range(retries):
        wants: list[set[int]] = []
        next_packet = 1
        for _i in range(r):
            mine: set[int] = set()
            used = sorted(set().union(*wants)) if wants else []
            rng.shuffle(used)
            for pkt in used:
                if len(mine) == r:
                    break
                if rng.random() >= share_prob:
                    continue
                if all(len(mine & w) + (pkt in w) <= 1 for w in wants):
                    mine.add(pkt)
            while len(mine) < r:
                mine.add(next_packet)
                next_packet += 1
            wants.append(mine)
        a = StateFeedbackMatrix.from_wants(next_packet - 1, wants)
        if is_efl_shape(a):
            return a
    raise InstanceError(f"could not build an EFL instance for r={r} after {retries} tries")


# --- text format ------------------------------------------------------------

def parse_sfm(text: str) -> StateFeedbackMatrix:
    lines = text.splitlines()
    if not lines:
        raise ParseError(1, "missing header 'N K'")
    header = lines[0].split()
    if len(header) != 2 or not all(h.isdigit() for h in header):
        raise ParseError(1, f"malformed header {lines[0]!r}, expected 'N K'")
    n, k = int(header[0]), int(header[1])
    if n < 1 or k < 1:
        raise ParseError(1, "N and K must be positive")
    body = lines[1:]
    # tolerate trailing blank lines only
    while body and not body[-1].strip():
        body.pop()
    if len(body) != n:
        raise ParseError(len(lines) + 1, f"expected {n} rows, found {len(body)}")
    wants = []
    for i, row in enumerate(body, start=2):
        row = row.strip()
        if len(row) != k:
            raise ParseError(i, f"row has {len(row)} cells, expected {k}")
        if set(row) - {"0", "1"}:
            raise ParseError(i, f"non-binary cell in {row!r}")
        w = frozenset(j + 1 for j, c in enumerate(row) if c == "1")
        if not w:
            raise ParseError(i, f"receiver {i - 1} wants nothing")
        wants.append(w)
    return StateFeedbackMatrix(k, tuple(wants))


def render_sfm(a: StateFeedbackMatrix) -> str:
    out = [f"{a.n_receivers} {a.n_packets}"]
    out += ["".join(map(str, row)) for row in a.rows()]
    return "\n".join(out) + "\n"
