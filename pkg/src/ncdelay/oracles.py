"""Exhaustive ground truth for small instances.

These searches are exponential by design and guarded by size limits. They are
meant to validate the schedulers and the closed-form bounds, not to be used
inside a sweep.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .field import FieldMatrix, get_field, random_coded_vector
from .graphs import ConflictGraph
from .instance import InstanceError, StateFeedbackMatrix, is_efl_shape
from .simulator import Policy, RankAnomalyError, Schedule, simulate

ORACLE_SEED = 20150101
CONFIRM_SEED = 7


class GuardError(ValueError):
    """Instance too large for an exhaustive oracle."""


@dataclass
class OracleResult:
    value: Any
    witness: Any = None
    exhausted: bool = True
    search_bound: int | None = None


# --- brute-force D_min ------------------------------------------------------------

def _remaining_bound(t: int, w: int, decoded: int, rank: int) -> int:
    """Least possible sum of decode times for the packets still missing.

    After ``s`` more transmissions the rank is at most ``rank + s`` and a
    receiver cannot have decoded more packets than its rank.
    """
    return sum(t + max(1, decoded + j - rank) for j in range(1, w - decoded + 1))


def dmin_bruteforce(
    a: StateFeedbackMatrix,
    l_max: int | None = None,
    *,
    max_receivers: int = 5,
    max_packets: int = 5,
    seed: int = ORACLE_SEED,
    confirm_seed: int = CONFIRM_SEED,
) -> OracleResult:
    """Minimum APDD over all schedules of at most ``l_max`` random-coded packets.

    Depth-first search over sequences of coding sets drawn from the wanted
    packets. A branch is cut when a transmission helps nobody (it can only
    delay everyone) or when an optimistic completion of the partial schedule
    cannot beat the incumbent. The witness is replayed through
    :func:`simulate` under two seeds; any disagreement raises
    :class:`RankAnomalyError`.
    """
    if a.n_receivers > max_receivers or a.n_packets > max_packets:
        raise GuardError(
            f"dmin_bruteforce limited to N <= {max_receivers}, K <= {max_packets}; "
            f"got N={a.n_receivers}, K={a.n_packets}"
        )
    if l_max is None:
        l_max = a.n_packets
    f = get_field()
    rng = random.Random(seed)
    wanted = a.wanted_packets()
    choices = [
        frozenset(c) for r in range(1, len(wanted) + 1) for c in itertools.combinations(wanted, r)
    ]
    coords = [sorted(w) for w in a.wants]
    w = a.w
    sum_w = a.sum_w()

    best_total = math.inf
    best_seq: list[frozenset[int]] | None = None
    seq: list[frozenset[int]] = []

    def dfs(bases, decoded_counts, cost, t):
        nonlocal best_total, best_seq
        if all(d == wn for d, wn in zip(decoded_counts, w)):
            if cost < best_total:
                best_total = cost
                best_seq = list(seq)
            return
        if t == l_max:
            return
        bound = cost + sum(
            _remaining_bound(t, wn, d, b.rank)
            for wn, d, b in zip(w, decoded_counts, bases)
            if d < wn
        )
        if bound >= best_total:
            return
        for m in choices:
            vec = random_coded_vector(m, a.n_packets, rng, f).coefficients
            new_bases = []
            new_counts = []
            new_cost = cost
            useful = False
            for n, cs in enumerate(coords):
                b = bases[n]
                d = decoded_counts[n]
                if d < w[n]:
                    proj = [vec[p - 1] for p in cs]
                    b2 = b.copy()
                    if b2.insert(proj):
                        useful = True
                        # a unit vector is in an RREF span iff it is a stored row
                        now = sum(1 for row in b2.rows if sum(1 for x in row if x) == 1)
                        new_cost += (now - d) * (t + 1)
                        d = now
                        b = b2
                    elif any(proj[j] for j in range(len(cs)) if not _is_decoded(b, j)):
                        raise RankAnomalyError("non-generic dependence in oracle search")
                new_bases.append(b)
                new_counts.append(d)
            if not useful:
                continue
            seq.append(m)
            dfs(new_bases, new_counts, new_cost, t + 1)
            seq.pop()

    dfs([FieldMatrix(len(c), f) for c in coords], [0] * a.n_receivers, 0, 0)

    if best_seq is None:
        return OracleResult(math.inf, None, True, l_max)
    value = Fraction(best_total, sum_w)
    witness = Schedule.of(best_seq, Policy.RANDOM, seed)
    for s in (seed, confirm_seed):
        replay = simulate(a, Schedule(witness.transmissions, s))
        if replay.apdd != value:
            raise RankAnomalyError(
                f"oracle witness replays to {replay.apdd} with seed {s}, expected {value}"
            )
    return OracleResult(value, witness, True, l_max)


def _is_decoded(basis: FieldMatrix, col: int) -> bool:
    return any(
        piv == col and sum(1 for x in row if x) == 1 for row, piv in zip(basis.rows, basis.pivots)
    )


# --- perfect solutions / strong colouring ----------------------------------------------

def perfect_solution_exists(
    a: StateFeedbackMatrix, *, max_packets: int = 20, max_w: int = 6
) -> OracleResult:
    """Decide whether every receiver can decode one new packet per transmission.

    A perfect schedule exists iff packets can be given rounds so that each
    receiver sees its wanted packets in rounds 1..w_n, one per round. Rounds
    are searched by backtracking, most-constrained packet first. Rounds that
    no receiver can tell apart (no w_n falls between them) are interchangeable,
    so only the lowest unused one of each such band is tried. The witness is
    the list of packet classes, round 1 first.
    """
    if a.n_packets > max_packets or max(a.w) > max_w:
        raise GuardError(
            f"perfect_solution_exists limited to K <= {max_packets}, max w <= {max_w}"
        )
    packets = a.wanted_packets()
    L = max(a.w)
    holders = {k: [n for n, w in enumerate(a.wants) if k in w] for k in packets}
    cap = {k: min(len(a.wants[n]) for n in holders[k]) for k in packets}
    t = a.t
    band_of = {}
    levels = sorted(set(a.w))
    lo = 0
    for band, hi in enumerate(levels):
        for c in range(lo + 1, hi + 1):
            band_of[c] = band
        lo = hi

    used_by = [set() for _ in a.wants]  # rounds taken at each receiver
    colour: dict[int, int] = {}
    used_globally: set[int] = set()

    def options(k):
        taken = set().union(*(used_by[n] for n in holders[k]))
        opts = []
        fresh_seen = set()
        for c in range(1, cap[k] + 1):
            if c in taken:
                continue
            if c not in used_globally:
                if band_of[c] in fresh_seen:
                    continue
                fresh_seen.add(band_of[c])
            opts.append(c)
        return opts

    def solve() -> bool:
        free = [k for k in packets if k not in colour]
        if not free:
            return True
        best_k, best_opts = None, None
        for k in free:
            opts = options(k)
            if best_opts is None or (len(opts), -t[k - 1], k) < (len(best_opts), -t[best_k - 1], best_k):
                best_k, best_opts = k, opts
            if not opts:
                return False
        k = best_k
        for c in best_opts:
            colour[k] = c
            for n in holders[k]:
                used_by[n].add(c)
            newly = c not in used_globally
            used_globally.add(c)
            if solve():
                return True
            if newly:
                used_globally.discard(c)
            for n in holders[k]:
                used_by[n].discard(c)
            del colour[k]
        return False

    if not solve():
        return OracleResult(False, None, True, L)
    classes = [sorted(k for k, c in colour.items() if c == r) for r in range(1, L + 1)]
    return OracleResult(True, classes, True, L)


def coloring_schedule(classes, policy: Policy = Policy.ALL_ONES, seed: int = 0) -> Schedule:
    return Schedule.of([c for c in classes if c], policy, seed)


# --- maximum weight independent set ---------------------------------------------------

def mwis_exact(g: ConflictGraph, *, max_vertices: int = 30) -> OracleResult:
    """Branch and bound over bitmasks.

    Vertices with no live neighbour are taken for free; otherwise branch on
    the live vertex of highest live degree. The bound is the current weight
    plus every live vertex's weight.
    """
    verts = g.vertices
    if len(verts) > max_vertices:
        raise GuardError(f"mwis_exact limited to {max_vertices} vertices, got {len(verts)}")
    idx = {v: i for i, v in enumerate(verts)}
    wts = [g.weights[v] for v in verts]
    nbr = [sum(1 << idx[u] for u in g.adj[v]) for v in verts]
    best = [-1, 0]

    def mask_weight(mask):
        total = 0
        while mask:
            low = mask & -mask
            total += wts[low.bit_length() - 1]
            mask ^= low
        return total

    def bb(live, weight, chosen):
        # take isolated live vertices immediately
        m = live
        while m:
            low = m & -m
            i = low.bit_length() - 1
            m ^= low
            if not nbr[i] & live:
                live &= ~low
                weight += wts[i]
                chosen |= low
        if not live:
            if weight > best[0]:
                best[0], best[1] = weight, chosen
            return
        if weight + mask_weight(live) <= best[0]:
            return
        pick, pick_deg = -1, -1
        m = live
        while m:
            low = m & -m
            i = low.bit_length() - 1
            m ^= low
            d = bin(nbr[i] & live).count("1")
            if d > pick_deg:
                pick, pick_deg = i, d
        bit = 1 << pick
        bb(live & ~bit & ~nbr[pick], weight + wts[pick], chosen | bit)
        bb(live & ~bit, weight, chosen)

    bb((1 << len(verts)) - 1, 0, 0)
    witness = {verts[i] for i in range(len(verts)) if best[1] >> i & 1}
    assert g.is_independent(witness)
    return OracleResult(best[0], witness, True, len(verts))


def check_efl(a: StateFeedbackMatrix) -> bool:
    """Probe the EFL-shaped conjecture: is there a perfect schedule?"""
    if not is_efl_shape(a):
        raise InstanceError(
            "instance is not EFL-shaped (r receivers, w_n = r, pairwise overlap <= 1)"
        )
    return bool(perfect_solution_exists(a).value)
