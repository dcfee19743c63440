import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncdelay.graphs import ConflictGraph, conflict_graph, greedy_mwis
from ncdelay.instance import (
    DemandHypergraph,
    StateFeedbackMatrix,
    gen_bernoulli,
    gen_complete_graph_instance,
    gen_uniform_pairs,
    hypergraph_from_sfm,
)
from ncdelay.schedulers import (
    Kind,
    SchedulerError,
    SchedulerSpec,
    minimal_vertex_cover_heuristic,
    mis_partition,
    schedule_gidnc,
    schedule_mis,
    schedule_rlnc,
    schedule_sidnc,
    schedule_uncoded,
    schedule_vc_alg1,
    vc_alg1_covers,
)
from ncdelay.simulator import Policy, apdd, is_throughput_optimal, simulate


def sfm(k, *wants):
    return StateFeedbackMatrix.from_wants(k, wants)


def test_conflict_graph():
    g = conflict_graph(sfm(4, {1, 2, 3}, {3, 4}, {4}))
    assert g.edges == [(1, 2), (1, 3), (2, 3), (3, 4)]
    assert g.weights == {1: 1, 2: 1, 3: 2, 4: 2}
    for u in g.adj:
        assert u not in g.adj[u]
        assert all(u in g.adj[v] for v in g.adj[u])


def test_greedy_mwis_is_maximal_independent():
    rng = random.Random(0)
    for _ in range(50):
        a = gen_uniform_pairs(rng.randint(3, 30), 10, rng.randrange(1 << 30))
        g = conflict_graph(a)
        s = greedy_mwis(g)
        assert g.is_independent(s)
        assert all(g.adj[v] & s for v in g.weights if v not in s)


def test_rlnc_shape():
    a = gen_uniform_pairs(30, 20, 1)
    s = schedule_rlnc(a)
    assert len(s) == 2
    assert all(m == frozenset(range(1, 21)) for m in s.coding_sets)
    assert all(t.policy is Policy.RANDOM for t in s.transmissions)
    assert len(schedule_rlnc(sfm(6, range(1, 7)))) == 6


@pytest.mark.parametrize("k", [2, 3, 4, 6, 8])
def test_uncoded_on_complete_graph(k):
    a = gen_complete_graph_instance(k)
    order = list(range(1, k + 1))
    random.Random(k).shuffle(order)
    assert apdd(simulate(a, schedule_uncoded(a, order)), a) == Fraction(k + 1, 2)
    assert simulate(a, schedule_uncoded(a)).apdd == Fraction(k + 1, 2)


def test_uncoded_single_receiver_and_order_check():
    a = sfm(4, {1, 2, 3, 4})
    assert simulate(a, schedule_uncoded(a)).u == [{1: 1, 2: 2, 3: 3, 4: 4}]
    with pytest.raises(SchedulerError):
        schedule_uncoded(a, [1, 2, 2, 4])


def test_sidnc():
    a = gen_complete_graph_instance(5)
    s = schedule_sidnc(a)
    assert sorted(len(m) for m in s.coding_sets) == [1] * 5
    assert simulate(a, s).apdd == 3
    b = sfm(2, {1}, {2})
    s = schedule_sidnc(b)
    assert s.coding_sets == [frozenset({1, 2})]
    assert simulate(b, s).apdd == 1


def test_sidnc_feasibility_random():
    rng = random.Random(4)
    for _ in range(40):
        a = gen_bernoulli(rng.randint(2, 25), rng.randint(2, 10), 0.3, rng.randrange(1 << 30))
        s = schedule_sidnc(a)
        for m in s.coding_sets:
            assert max(len(m & w) for w in a.wants) == 1
        assert simulate(a, s).complete


def test_gidnc_xor_and_single():
    # receiver 1 wants p1 and holds p2, receiver 2 the reverse
    a = sfm(2, {1}, {2})
    assert schedule_gidnc(a).coding_sets == [frozenset({1, 2})]
    b = sfm(3, {1, 2, 3})
    s = schedule_gidnc(b)
    assert [len(m) for m in s.coding_sets] == [1, 1, 1]


def test_instant_decodability_of_idnc():
    rng = random.Random(11)
    for _ in range(30):
        a = gen_bernoulli(rng.randint(2, 30), rng.randint(2, 12), 0.25, rng.randrange(1 << 30))
        for sched in (schedule_sidnc, schedule_gidnc):
            s = sched(a)
            r = simulate(a, s)
            assert r.complete
            served_before = [set() for _ in a.wants]
            for t, m in enumerate(s.coding_sets, start=1):
                for n, w in enumerate(a.wants):
                    got = r.decoded_at(n, t)
                    assert len(got) <= 1
                    outstanding = (w - served_before[n]) & m
                    if len(outstanding) == 1:
                        assert got == sorted(outstanding)
                    served_before[n] |= set(got)


def test_vertex_cover_examples():
    path = DemandHypergraph.from_edges(3, [{1, 2}, {2, 3}])
    assert minimal_vertex_cover_heuristic(path) == {2}
    one = DemandHypergraph.from_edges(3, [{1, 2, 3}])
    assert len(minimal_vertex_cover_heuristic(one)) == 1
    # 4-path: the highest-degree pass alone picks {2} and misses {3,4}
    p4 = DemandHypergraph.from_edges(4, [{1, 2}, {2, 3}, {3, 4}])
    vc = minimal_vertex_cover_heuristic(p4)
    assert all(e.vertices & vc for e in p4.edges)


def is_minimal_cover(h, vc):
    if not all(e.vertices & vc for e in h.edges):
        return False
    return all(any(not (e.vertices & (vc - {v})) for e in h.edges) for v in vc)


hypergraphs = st.integers(2, 7).flatmap(
    lambda k: st.lists(
        st.frozensets(st.integers(1, k), min_size=1, max_size=4), min_size=1, max_size=10
    ).map(lambda es: DemandHypergraph.from_edges(k, es))
)


@given(hypergraphs)
def test_vertex_cover_minimal(h):
    vc = minimal_vertex_cover_heuristic(h)
    assert is_minimal_cover(h, vc)
    assert any(len(e.vertices & vc) == 1 for e in h.edges)
    # brute force: no proper subset covers
    for r in range(len(vc)):
        for sub in itertools.combinations(vc, r):
            assert not all(e.vertices & set(sub) for e in h.edges)


def test_vc_alg1_covers_disjoint_and_touch_everyone():
    rng = random.Random(7)
    for _ in range(40):
        a = gen_bernoulli(rng.randint(1, 40), rng.randint(1, 15), 0.2, rng.randrange(1 << 30))
        covers = vc_alg1_covers(a)
        for c1, c2 in itertools.combinations(covers, 2):
            assert not c1 & c2
        for w in a.wants:
            seen = set()
            for c in covers:
                assert (w - seen) & c
                seen |= c


def test_vc_alg1_basic():
    a = sfm(2, {1}, {2})
    s = schedule_vc_alg1(a)
    assert s.coding_sets == [frozenset({1, 2})]
    assert simulate(a, s).apdd == 1 == a.rlnc_apdd()


def test_vc_alg1_throughput_optimal_random():
    rng = random.Random(2)
    for i in range(40):
        a = gen_bernoulli(rng.randint(1, 40), rng.randint(1, 15), 0.2, i)
        r = simulate(a, schedule_vc_alg1(a, seed=i))
        assert is_throughput_optimal(r, a)
        assert r.apdd <= a.rlnc_apdd()


FIVE_PAIRS = sfm(4, {1, 3}, {1, 4}, {2, 3}, {2, 4}, {3, 4})


def test_mis_five_pairs():
    part = mis_partition(FIVE_PAIRS)
    assert part.independent == {1, 2}
    assert part.n_independent_receivers == 4
    assert simulate(FIVE_PAIRS, schedule_mis(FIVE_PAIRS)).apdd == Fraction(8, 5)


def test_mis_complete_graph_k4():
    a = gen_complete_graph_instance(4)
    part = mis_partition(a)
    assert len(part.independent) == 1 and part.n_independent_receivers == 3
    assert simulate(a, schedule_mis(a)).apdd == Fraction(7, 4)


def test_mis_rejects_non_pairs():
    with pytest.raises(SchedulerError):
        schedule_mis(sfm(3, {1, 2, 3}))
    with pytest.raises(SchedulerError):
        mis_partition(FIVE_PAIRS, "fancy")


def test_mis_threshold_fallback_warns():
    a = gen_uniform_pairs(40, 30, 0)
    with pytest.warns(RuntimeWarning):
        part = mis_partition(a, "exact", threshold=10)
    assert not part.exact


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 100), st.integers(0, 10_000), st.sampled_from(["exact", "greedy"]))
def test_mis_formula_identity(n, seed, mode):
    a = gen_uniform_pairs(n, 20, seed)
    part = mis_partition(a, mode)
    r = simulate(a, schedule_mis(a, mode, seed))
    assert r.apdd == 2 - Fraction(part.n_independent_receivers, 2 * n)
    assert r.apdd < 2
    if mode == "exact":
        assert r.apdd <= Fraction(39, 20)
        assert r.apdd / a.lower_bound() <= Fraction(4 - Fraction(2, 20), 3)


def test_spec_parsing_and_determinism():
    assert SchedulerSpec.parse("mis-greedy").label == "MIS_GREEDY"
    assert SchedulerSpec.parse("vc_alg1").kind is Kind.VC_ALG1
    with pytest.raises(SchedulerError):
        SchedulerSpec.parse("bogus")
    a = gen_bernoulli(20, 10, 0.3, 5)
    for name in ["RLNC", "UNCODED", "S_IDNC", "G_IDNC", "VC_ALG1"]:
        spec = SchedulerSpec.parse(name)
        assert spec.build(a, 3) == spec.build(a, 3)


def test_gidnc_many_pairs_exceeds_rlnc():
    vals = [simulate(a, schedule_gidnc(a)).apdd for a in (gen_uniform_pairs(100, 20, s) for s in range(10))]
    assert sum(vals) / len(vals) > 2


def test_conflict_graph_from_edges_rejects_loop():
    with pytest.raises(ValueError):
        ConflictGraph.from_edges({1: 1}, [(1, 1)])
