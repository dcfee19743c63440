import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncdelay.field import naive_rank, ones_vector, random_coded_vector
from ncdelay.instance import StateFeedbackMatrix, gen_bernoulli
from ncdelay.schedulers import schedule_rlnc, schedule_sidnc
from ncdelay.simulator import (
    DecodeReport,
    Policy,
    Schedule,
    Transmission,
    apdd,
    is_perfect,
    is_throughput_optimal,
    lower_bound,
    parse_schedule,
    render_report_csv,
    render_schedule,
    rlnc_apdd_closed_form,
    simulate,
)


def sfm(k, *wants):
    return StateFeedbackMatrix.from_wants(k, wants)


def reference_decode_times(a, s):
    """Decode times by rank tests with one-shot elimination at every step."""
    rng = random.Random(s.seed)
    vecs = []
    for tx in s.transmissions:
        if tx.policy is Policy.RANDOM:
            vecs.append(random_coded_vector(tx.coding_set, a.n_packets, rng).coefficients)
        else:
            vecs.append(ones_vector(tx.coding_set, a.n_packets).coefficients)
    out = []
    for w in a.wants:
        cs = sorted(w)
        times = {}
        for k in cs:
            unit = [int(p == k) for p in cs]
            for t in range(1, len(vecs) + 1):
                proj = [[v[p - 1] for p in cs] for v in vecs[:t]]
                if naive_rank(proj + [unit], len(cs)) == naive_rank(proj, len(cs)):
                    times[k] = t
                    break
            else:
                times[k] = None
        out.append(times)
    return out


def test_sequential_uncoded():
    a = sfm(2, {1, 2})
    r = simulate(a, Schedule.of([{1}, {2}], Policy.ALL_ONES))
    assert r.u == [{1: 1, 2: 2}]
    assert apdd(r, a) == Fraction(3, 2)


def test_block_decoding_two_random():
    a = sfm(2, {1, 2})
    s = Schedule.of([{1, 2}, {1, 2}], Policy.RANDOM, seed=17)
    r = simulate(a, s)
    assert r.u == [{1: 2, 2: 2}]
    assert apdd(r, a) == 2
    assert r.u == reference_decode_times(a, s)


def test_xor_serves_both():
    a = sfm(2, {1}, {2})
    r = simulate(a, Schedule.of([{1, 2}], Policy.ALL_ONES))
    assert r.u == [{1: 1}, {2: 1}]
    assert apdd(r, a) == 1
    assert is_perfect(r, a)


def test_incomplete_report():
    a = sfm(2, {1, 2})
    r = simulate(a, Schedule.of([{1}], Policy.ALL_ONES))
    assert not r.complete
    assert r.u[0][2] is None
    assert r.apdd is None
    with pytest.raises(ValueError):
        apdd(r, a)
    assert not is_throughput_optimal(r, a)


def test_apdd_hand_value():
    a = sfm(2, {1, 2})
    r = DecodeReport([{1: 1, 2: 2}], [[1, 2]], [2], 2, wants=a.wants)
    assert apdd(r, a) == Fraction(3, 2)


def test_lower_bound_values():
    assert lower_bound(sfm(3, {1, 2}, {2, 3}, {1, 3})) == Fraction(3, 2)
    assert lower_bound(sfm(7, set(range(1, 8)))) == 4
    assert lower_bound(sfm(3, {1}, {1, 2}, {1, 2, 3})) == Fraction(5, 3)


def test_rlnc_closed_form_values():
    assert rlnc_apdd_closed_form(sfm(3, {1, 2}, {2, 3})) == 2
    a = sfm(3, {1}, {1, 2}, {1, 2, 3})
    assert rlnc_apdd_closed_form(a) == Fraction(7, 3)
    r = simulate(a, schedule_rlnc(a, seed=4))
    assert apdd(r, a) == Fraction(7, 3)
    # block decoding: every u equals w_n
    assert all(set(row.values()) == {len(row)} for row in r.u)


def test_mis_five_pairs_value_by_simulation():
    a = sfm(4, {1, 3}, {1, 4}, {2, 3}, {2, 4}, {3, 4})
    r = simulate(a, Schedule.of([{3, 4}, {1, 2, 3, 4}], Policy.RANDOM, seed=1))
    assert apdd(r, a) == Fraction(8, 5) == 2 - Fraction(4, 2 * 5)


def test_throughput_optimality():
    a = gen_bernoulli(12, 8, 0.3, seed=2)
    assert is_throughput_optimal(simulate(a, schedule_rlnc(a, 3)), a)
    from ncdelay.instance import gen_complete_graph_instance
    from ncdelay.schedulers import schedule_uncoded

    c = gen_complete_graph_instance(4)
    rep = simulate(c, schedule_uncoded(c))
    assert rep.complete and not is_throughput_optimal(rep, c)
    # the receiver wanting {3,4} idles at t = 1, 2
    n = c.wants.index(frozenset({3, 4}))
    assert rep.dof_trace[n][:2] == [0, 0]
    single = sfm(3, {1, 2, 3})
    assert is_throughput_optimal(simulate(single, Schedule.of([{1}, {2, 3}, {3}])), single)


def test_is_perfect_cases():
    one = sfm(3, {1, 2, 3})
    r = simulate(one, schedule_rlnc(one, 0))
    assert r.u == [{1: 3, 2: 3, 3: 3}]
    assert not is_perfect(r, one)


def test_sidnc_feasible_sum_decodes_exactly_singletons():
    a = gen_bernoulli(15, 8, 0.3, seed=8)
    s = schedule_sidnc(a)
    r = simulate(a, s)
    for t, tx in enumerate(s.transmissions, start=1):
        for n, w in enumerate(a.wants):
            got = r.decoded_at(n, t)
            assert got == sorted(tx.coding_set & w)
            assert len(got) <= 1


def test_schedule_text_round_trip():
    s = Schedule((Transmission({1, 3}, Policy.RANDOM), Transmission({2}, Policy.ALL_ONES)), 5)
    text = render_schedule(s)
    assert text == "R 1 3\nS 2\n"
    assert parse_schedule(text, 5) == s
    with pytest.raises(ValueError):
        parse_schedule("X 1 2\n")
    with pytest.raises(ValueError):
        parse_schedule("R\n")


def test_report_csv():
    a = sfm(2, {1}, {2})
    text = render_report_csv(simulate(a, Schedule.of([{1, 2}], Policy.ALL_ONES)), a)
    lines = text.splitlines()
    assert lines[0] == "kind,receiver,packet,decode_time,apdd,completion,throughput_optimal"
    assert lines[1:3] == ["decode,1,1,1,,,", "decode,2,2,1,,,"]
    assert lines[3] == "summary,,,,1.000000,1,1"


def test_validate_rejects_bad_packet():
    with pytest.raises(ValueError):
        simulate(sfm(2, {1}), Schedule.of([{3}]))


instances = st.integers(1, 5).flatmap(
    lambda k: st.lists(st.frozensets(st.integers(1, k), min_size=1), min_size=1, max_size=4).map(
        lambda w: StateFeedbackMatrix.from_wants(k, w)
    )
)


@st.composite
def instance_and_schedule(draw):
    a = draw(instances)
    sets = st.frozensets(st.integers(1, a.n_packets), min_size=1)
    txs = draw(st.lists(st.tuples(sets, st.sampled_from(list(Policy))), min_size=1, max_size=6))
    seed = draw(st.integers(0, 2**31))
    return a, Schedule(tuple(Transmission(m, p) for m, p in txs), seed)


@settings(max_examples=150, deadline=None)
@given(instance_and_schedule())
def test_matches_reference_decoder(case):
    a, s = case
    r = simulate(a, s)
    assert r.u == reference_decode_times(a, s)


@settings(max_examples=100, deadline=None)
@given(instance_and_schedule(), st.lists(st.frozensets(st.integers(1, 5), min_size=1), max_size=3))
def test_prefix_stability_and_bounds(case, extra):
    a, s = case
    extra = [m & set(range(1, a.n_packets + 1)) for m in extra]
    longer = s.extend(Transmission(m, Policy.RANDOM) for m in extra if m)
    r1, r2 = simulate(a, s), simulate(a, longer)
    for row1, row2 in zip(r1.u, r2.u):
        for k, t in row1.items():
            if t is not None:
                assert row2[k] == t
    for n, trace in enumerate(r2.dof_trace):
        steps = [b - a_ for a_, b in zip([0] + trace, trace)]
        assert all(x in (0, 1) for x in steps)
        assert trace[-1] <= a.w[n]
    if r2.complete:
        assert apdd(r2, a) >= lower_bound(a)
        if is_perfect(r2, a):
            assert apdd(r2, a) == lower_bound(a)
