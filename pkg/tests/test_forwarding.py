import pytest

from oppccn.core import ContentName, Packet
from oppccn.engine import Simulator
from oppccn.forwarding import (ActionKind, MobccnProtocol, RetransmissionPolicy, maybe_retransmit,
                               on_contact_begin_flush, process_data, process_interest)
from oppccn.mobility import DOWN, UP, ContactTrace
from oppccn.routing import MobccnNode

from oracles import FIVE_NODE, THREE_NODE

N = ContentName(2, 1)


def _node_with_route(best, in_contact, u=0.5):
    p = MobccnNode(0)
    p.fib.update(2, best, u)
    if in_contact:
        p.neighbors.add(best)
        p.cnu.store(2, best, u)
    return p


def test_interest_hits_content_store():
    p = MobccnNode(0)
    p.cs.insert(N)
    act = process_interest(p, Packet.interest(N, 5), 5)
    assert act.kind is ActionKind.RETURN_DATA and act.to == 5 and act.packet.name == N


def test_second_interest_only_registers():
    p = _node_with_route(7, True)
    assert process_interest(p, Packet.interest(N, 5), 5).kind is ActionKind.FORWARDED
    act = process_interest(p, Packet.interest(N, 6), 6)
    assert act.kind is ActionKind.REGISTERED
    assert p.pit.get(N).faces == [5, 6]


def test_forward_hold_drop():
    act = process_interest(_node_with_route(7, True), Packet.interest(N, 5), 5)
    assert (act.kind, act.to) == (ActionKind.FORWARDED, 7)
    p = _node_with_route(7, False)
    act = process_interest(p, Packet.interest(N, 5), 5)
    assert (act.kind, act.to) == (ActionKind.HELD, 7) and N in p.outbox
    p = MobccnNode(0)
    assert process_interest(p, Packet.interest(N, 5), 5).kind is ActionKind.DROPPED
    assert N not in p.pit


def test_never_forwards_back_to_arrival_face():
    p = _node_with_route(5, True, u=0.9)
    p.fib.update(2, 8, 0.1)
    act = process_interest(p, Packet.interest(N, 5), 5)
    assert (act.kind, act.to) == (ActionKind.HELD, 8)


def test_flush_on_contact():
    p = _node_with_route(7, False)
    process_interest(p, Packet.interest(N, 5), 5)
    assert on_contact_begin_flush(p, 3) == []
    p.neighbors.add(7)
    acts = on_contact_begin_flush(p, 7)
    assert [(a.kind, a.to) for a in acts] == [(ActionKind.FORWARDED, 7)]
    assert p.outbox == {}
    assert on_contact_begin_flush(MobccnNode(1)) == []


def test_data_fans_back_over_all_faces():
    p = _node_with_route(7, True)
    process_interest(p, Packet.interest(N, 5), 5)
    process_interest(p, Packet.interest(N, 6), 6)
    acts = process_data(p, Packet.data(N), 7, caching_enabled=False)
    assert sorted(a.to for a in acts) == [5, 6]
    assert N not in p.pit and N not in p.cs
    assert process_data(p, Packet.data(N), 7, caching_enabled=False) == []


def test_data_caching_and_consumer_storage():
    p = _node_with_route(7, True)
    process_interest(p, Packet.interest(N, 5), 5)
    process_data(p, Packet.data(N), 7, caching_enabled=True)
    assert N in p.cs
    c = _node_with_route(7, True)
    process_interest(c, Packet.interest(N, 0), 0)
    acts = process_data(c, Packet.data(N), 7, caching_enabled=False)
    assert acts[0].kind is ActionKind.DELIVERED and N in c.cs


def test_data_cancels_held_interest():
    p = _node_with_route(7, False)
    process_interest(p, Packet.interest(N, 5), 5)
    process_data(p, Packet.data(N), 9, caching_enabled=True)
    assert p.outbox == {}


def test_retransmission_threshold():
    with pytest.raises(ValueError):
        RetransmissionPolicy(True, 1)
    pol = RetransmissionPolicy(True, 3)
    p = _node_with_route(7, True)
    process_interest(p, Packet.interest(N, 5), 5)
    process_interest(p, Packet.interest(N, 6), 6)
    assert maybe_retransmit(p, N, pol) is None
    process_interest(p, Packet.interest(N, 8), 8)
    act = maybe_retransmit(p, N, pol)
    assert (act.kind, act.to) == (ActionKind.FORWARDED, 7)
    assert act.packet.origin == 5
    assert maybe_retransmit(p, N, RetransmissionPolicy(False, 3)) is None
    process_data(p, Packet.data(N), 7, False)
    assert maybe_retransmit(p, N, pol) is None


def _run_oracle(o, **kw):
    proto = MobccnProtocol(o["trace"].n_nodes, o["placement"], cache=False, retrans=False)
    sim = Simulator(o["trace"].n_nodes, proto, record_packets=True, **kw)
    report = sim.run(o["trace"], o["requests"], o["duration"])
    return proto, sim, report


def _path(sim, kind):
    return [(t.time, t.src, t.dst) for t in sim.packet_log if t.kind == kind]


@pytest.mark.parametrize("oracle", [THREE_NODE, FIVE_NODE], ids=["3-node", "5-node"])
def test_breadcrumb_oracle(oracle):
    _, sim, report = _run_oracle(oracle)
    ipath, dpath = _path(sim, "Interest"), _path(sim, "Data")
    assert ipath == oracle["interest_path"]
    assert dpath == oracle["data_path"]
    assert [(s, d) for _, s, d in dpath] == [(d, s) for _, s, d in reversed(ipath)]
    assert report.e2e_delay == [oracle["delay"]]
    assert report.hops == [oracle["hops"]]


def test_three_node_bytes():
    o = THREE_NODE
    _, _, r = _run_oracle(o)
    assert (r.bytes_interest, r.bytes_data, r.bytes_control) == (
        o["bytes_interest"], o["bytes_data"], o["bytes_control"])


def _run_until(o, t_end):
    cut = [e for e in o["trace"].events if e[0] <= t_end]
    reqs = [r for r in o["requests"] if r.time <= t_end]
    proto = MobccnProtocol(3, o["placement"], cache=False, retrans=False)
    Simulator(3, proto).run(ContactTrace(3, cut), reqs, t_end)
    return proto


def test_three_node_routing_state():
    o = THREE_NODE
    proto = _run_until(o, 1000.0)
    a, b = proto.nodes[0], proto.nodes[1]
    assert a.fib.find(0).per_neighbor[1] == pytest.approx(o["fib_a_via_b"], rel=1e-12)
    assert b.fib.find(0).per_neighbor[0] == pytest.approx(o["fib_b_via_a"], rel=1e-12)
    assert b.utility.own_utility[0] == pytest.approx(o["own_b"], rel=1e-12)
    own = _run_until(o, 2000.0).nodes[1].utility.own_utility[0]
    assert own == pytest.approx(o["own_b_after_2000"], rel=1e-12)
    proto, _, _ = _run_oracle(o)
    assert proto.nodes[1].utility.own_utility[0] == pytest.approx(o["own_b_final"], rel=1e-12)


def test_data_waits_for_face():
    # the consumer leaves before the Data comes back; B delivers on the next meeting
    proto, sim, _ = _run_oracle(THREE_NODE)
    assert proto.nodes[1].data_outbox == {}
    assert ("Data", 1, 0) in [(t.kind, t.src, t.dst) for t in sim.packet_log]


def test_single_copy_holds_on_oracles():
    peaks = []

    def watch(sim):
        peaks.append(max(sim.protocol.live_interest_copies().values(), default=0))
    _run_oracle(THREE_NODE, observer=watch)
    assert max(peaks) == 1


def test_retransmission_duplicates_are_counted():
    # two consumers ask B for the same name; with threshold 2 B retransmits
    n = ContentName(0, 0)
    ev = [(10.0, 1, 3, UP), (20.0, 1, 3, DOWN),
          (100.0, 0, 1, UP), (100.0, 1, 2, UP), (110.0, 0, 1, DOWN), (110.0, 1, 2, DOWN),
          (500.0, 1, 3, UP), (510.0, 1, 3, DOWN),
          (600.0, 0, 1, UP), (600.0, 1, 2, UP), (610.0, 0, 1, DOWN), (610.0, 1, 2, DOWN)]
    from oppccn.workload import Request
    reqs = [Request(105.0, 0, n, 0), Request(106.0, 2, n, 1)]
    proto = MobccnProtocol(4, {3: {n}}, cache=False, retrans=True, threshold=2)
    r = Simulator(4, proto).run(ContactTrace(4, ev), reqs, 700.0)
    assert r.delivery_rate == 1.0
    assert r.hops == [2, 2]
