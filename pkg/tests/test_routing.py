import math

import pytest
from hypothesis import given, strategies as st

from oppccn.core import ContentName, HelloRecord, Packet
from oppccn.routing import (ICT_INIT, U_CAP, IctEstimator, MobccnNode, build_hello, contact_down,
                            direct_utility, indirect_utility, overall_utility, process_hello,
                            record_type_encounters)

pos = st.floats(1e-3, 1e6, allow_nan=False)


def test_ict_mean():
    est = IctEstimator()
    for t in (0, 100, 300):
        est.record("q", t)
    assert est.mean("q") == 150
    assert est.samples["q"] == 2
    assert est.estimate("other") == ICT_INIT


def test_ict_ignores_zero_gaps_and_rejects_time_travel():
    est = IctEstimator()
    est.record(1, 10).record(1, 10)
    assert est.mean(1) is None
    with pytest.raises(ValueError):
        est.record(1, 5)


def test_ict_ewma():
    est = IctEstimator("ewma", 0.5)
    for t in (0, 100, 300, 310):
        est.record(0, t)
    assert est.mean(0) == pytest.approx(0.5 * 10 + 0.5 * (0.5 * 200 + 0.5 * 100))


def test_direct_utility():
    assert direct_utility(10000) == pytest.approx(1e-4)
    assert direct_utility(0) == U_CAP
    assert direct_utility(None) == 0.0
    with pytest.raises(ValueError):
        direct_utility(-1)


def test_indirect_utility():
    assert indirect_utility(0.5, 2) == pytest.approx(0.25)
    assert indirect_utility(0.7, 0) == pytest.approx(0.7)
    assert indirect_utility(0.0, 5) == 0.0


def test_overall_utility():
    assert overall_utility(0.1, [0.3, 0.2]) == 0.3
    assert overall_utility(0.4, []) == 0.4


@given(pos, pos)
def test_indirect_below_both_terms(u, ict):
    v = indirect_utility(u, ict)
    assert 0 < v <= u
    assert v <= 1.0 / ict * (1 + 1e-12)


@given(pos, pos, pos)
def test_indirect_monotone(u, ict1, ict2):
    lo, hi = sorted((ict1, ict2))
    assert indirect_utility(u, lo) >= indirect_utility(u, hi)


@given(st.floats(0, 1e9, allow_nan=False))
def test_direct_bounded(ict):
    assert 0 < direct_utility(ict) <= U_CAP


def _provider(i=0):
    n = MobccnNode(9)
    n.cs.insert(ContentName(i, 0))
    n.make_provider()
    return n


def test_provider_hello():
    n = _provider(3)
    h = build_hello(n)
    assert h.hello_records == (HelloRecord(3, U_CAP / 2, True),)
    assert build_hello(MobccnNode(0)).hello_records == ()


def test_process_hello_first_encounter_uses_bootstrap():
    p = MobccnNode(0)
    hello = Packet.hello([HelloRecord(4, 0.5, True)])
    record_type_encounters(p, hello, 1, 10.0)
    process_hello(p, hello, 1, 10.0)
    assert p.cnu.get(4, 1) == 0.5
    assert p.fib.find(4).per_neighbor[1] == pytest.approx(1 / ICT_INIT)
    assert p.utility.own_utility[4] == pytest.approx(1 / ICT_INIT)


def test_process_hello_indirect():
    p = MobccnNode(0)
    for t in (0.0, 2.0):
        p.ict_nodes.record(1, t)
    process_hello(p, Packet.hello([HelloRecord(4, 0.5, False)]), 1, 2.0)
    assert p.fib.find(4).per_neighbor[1] == pytest.approx(0.25)
    assert p.utility.own_utility[4] == pytest.approx(0.25)


def test_process_hello_skips_negative_utility():
    p = MobccnNode(0)
    process_hello(p, Packet.hello([HelloRecord(4, -1.0, False), HelloRecord(5, math.nan, False),
                                   HelloRecord(6, 0.5, False)]), 1, 0.0)
    assert p.malformed_records == 2
    assert p.fib.find(4) is None and p.fib.find(6) is not None


def test_type_encounter_counted_once_per_contact():
    p = MobccnNode(0)
    h = Packet.hello([HelloRecord(4, 0.5, True)])
    record_type_encounters(p, h, 1, 0.0)
    record_type_encounters(p, h, 1, 5.0)
    assert p.ict_types.samples.get(4, 0) == 0
    contact_down(p, 1)
    record_type_encounters(p, h, 1, 100.0)
    assert p.ict_types.mean(4) == 100.0


def test_contact_down_clears_cnu():
    p = MobccnNode(0)
    p.neighbors.add(1)
    process_hello(p, Packet.hello([HelloRecord(4, 0.5, False)]), 1, 0.0)
    contact_down(p, 1)
    assert p.cnu.get(4, 1) is None and 1 not in p.neighbors
    # the FIB keeps the last computed value
    assert p.fib.find(4).per_neighbor[1] > 0


@given(st.lists(st.tuples(st.integers(0, 5), st.floats(0, 10), st.booleans()), max_size=8))
def test_hello_processing_is_idempotent(records):
    recs = [HelloRecord(*r) for r in records]
    a, b = MobccnNode(0), MobccnNode(0)
    hello = Packet.hello(recs)
    process_hello(a, hello, 1, 50.0)
    process_hello(b, hello, 1, 50.0)
    process_hello(b, hello, 1, 50.0)
    assert a.fib.entries == b.fib.entries
    assert a.utility.own_utility == b.utility.own_utility
    assert a.cnu.entries == b.cnu.entries
