"""MobCCN forwarding: Interest processing, deferred forwarding, breadcrumb Data
return and the light Interest retransmission mechanism."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Mapping, Optional, Set, Tuple

from .core import ContentName, NodeId, Packet, PacketKind
from .engine import Protocol
from .routing import (MobccnNode, RoutingParams, build_hello, contact_down, process_hello,
                      record_type_encounters)
from .tables import PitResult, best_forwarder, cs_lookup, pit_register


class ActionKind(str, Enum):
    RETURN_DATA = "ReturnData"
    REGISTERED = "Registered"
    FORWARDED = "Forwarded"
    HELD = "Held"
    DROPPED = "Dropped"
    DELIVERED = "Delivered"


@dataclass(frozen=True)
class Action:
    kind: ActionKind
    to: Optional[NodeId] = None
    packet: Optional[Packet] = None


@dataclass(frozen=True)
class RetransmissionPolicy:
    enabled: bool = True
    threshold: int = 3

    def __post_init__(self):
        if self.threshold < 2:
            raise ValueError("retransmission threshold must be >= 2")


def _arrival_faces(node: MobccnNode, name: ContentName):
    entry = node.pit.get(name)
    return entry.faces if entry is not None else ()


def _dispatch(node: MobccnNode, interest: Packet) -> Action:
    name = interest.name
    best = best_forwarder(node.fib, node.cnu, name.content_type, node.neighbors,
                          _arrival_faces(node, name))
    if best is None:
        return Action(ActionKind.DROPPED, packet=interest)
    j, _, in_contact = best
    if in_contact:
        node.outbox.pop(name, None)
        return Action(ActionKind.FORWARDED, to=j, packet=interest)
    node.outbox[name] = interest
    return Action(ActionKind.HELD, to=j, packet=interest)


def process_interest(node: MobccnNode, interest: Packet, frm: NodeId) -> Action:
    if interest.kind is not PacketKind.INTEREST:
        raise ValueError("not an Interest")
    name = interest.name
    data = cs_lookup(node.cs, name)
    if data is not None:
        return Action(ActionKind.RETURN_DATA, to=frm, packet=data)
    if pit_register(node.pit, name, frm, interest) is PitResult.FACE_ADDED:
        return Action(ActionKind.REGISTERED, packet=interest)
    action = _dispatch(node, interest)
    if action.kind is ActionKind.DROPPED:
        # nothing will ever answer this entry; keep the PIT clean for later requests
        node.pit.entries.pop(name, None)
    return action


def on_contact_begin_flush(node: MobccnNode, q: Optional[NodeId] = None) -> List[Action]:
    """Re-evaluates every held Interest; those whose best next hop is now in
    contact are forwarded and leave the outbox."""
    actions = []
    for name in sorted(node.outbox):
        interest = node.outbox[name]
        best = best_forwarder(node.fib, node.cnu, name.content_type, node.neighbors,
                              _arrival_faces(node, name))
        if best is not None and best[2]:
            del node.outbox[name]
            actions.append(Action(ActionKind.FORWARDED, to=best[0], packet=interest))
    return actions


def process_data(node: MobccnNode, data: Packet, frm: NodeId,
                 caching_enabled: bool) -> List[Action]:
    """Fans a Data packet back over the PIT faces. Unsolicited Data yields no action."""
    if data.kind is not PacketKind.DATA:
        raise ValueError("not a Data packet")
    entry = node.pit.satisfy(data.name)
    if entry is None:
        return []
    node.outbox.pop(data.name, None)
    local = node.node_id in entry.faces
    if caching_enabled or local:
        node.cs.insert(data.name, data.payload_bytes)
    actions = []
    for face in entry.faces:
        if face == node.node_id:
            actions.append(Action(ActionKind.DELIVERED, to=face, packet=data))
        else:
            actions.append(Action(ActionKind.FORWARDED, to=face, packet=data))
    return actions


def maybe_retransmit(node: MobccnNode, name: ContentName,
                     policy: RetransmissionPolicy) -> Optional[Action]:
    if not policy.enabled:
        return None
    entry = node.pit.get(name)
    if entry is None or entry.satisfied or entry.arrivals % policy.threshold != 0:
        return None
    action = _dispatch(node, entry.first_interest)
    if action.kind is ActionKind.DROPPED:
        return None
    return action


class MobccnProtocol(Protocol):
    """Binds MobCCN node states to the engine."""

    def __init__(self, n_nodes: int, placement: Mapping[NodeId, Set[ContentName]],
                 cache: bool = True, retrans: bool = True, threshold: int = 3,
                 params: Optional[RoutingParams] = None, payload_bytes: int = 1024):
        self.name = "mobccn" if retrans else "mobccn_noretrans"
        self.cache = cache
        self.retrans = retrans
        self.policy = RetransmissionPolicy(retrans, threshold)
        params = params or RoutingParams()
        self.nodes = [MobccnNode(k, params) for k in range(n_nodes)]
        for k, names in placement.items():
            for n in names:
                self.nodes[k].cs.insert(ContentName(*n), payload_bytes)
            if names:
                self.nodes[k].make_provider()
        self.pending: List[Dict[ContentName, List[int]]] = [defaultdict(list) for _ in range(n_nodes)]
        self.delivered_names: List[Set[ContentName]] = [set() for _ in range(n_nodes)]

    # engine hooks

    def contact_up(self, a, b):
        sim = self.sim
        na, nb = self.nodes[a], self.nodes[b]
        na.neighbors.add(b)
        nb.neighbors.add(a)
        na.ict_nodes.record(b, sim.now)
        nb.ict_nodes.record(a, sim.now)
        ha, hb = build_hello(na), build_hello(nb)
        sim.send(a, b, ha)
        sim.send(b, a, hb)
        self._flush_data(na, b)
        self._flush_data(nb, a)

    def contact_down(self, a, b):
        contact_down(self.nodes[a], b)
        contact_down(self.nodes[b], a)

    def request(self, req):
        node = self.nodes[req.consumer]
        name = ContentName(*req.name)
        self.pending[node.node_id][name].append(req.request_id)
        interest = Packet.interest(name, node.node_id, req.request_id)
        self._handle_interest(node, interest, node.node_id)

    def receive(self, src, dst, packet):
        node = self.nodes[dst]
        if packet.kind is PacketKind.HELLO:
            record_type_encounters(node, packet, src, self.sim.now)
            process_hello(node, packet, src, self.sim.now)
            self._execute(node, on_contact_begin_flush(node, src))
        elif packet.kind is PacketKind.INTEREST:
            self._handle_interest(node, packet, src)
        else:
            self._handle_data(node, packet, src)

    def cache_count(self):
        return sum(len(n.cs) for n in self.nodes)

    def live_interest_copies(self):
        return Counter(p.request_id for n in self.nodes for p in n.outbox.values())

    # internals

    def _handle_interest(self, node: MobccnNode, interest: Packet, frm: NodeId) -> None:
        action = process_interest(node, interest, frm)
        if action.kind is ActionKind.REGISTERED:
            retx = maybe_retransmit(node, interest.name, self.policy)
            if retx is not None:
                self._execute(node, [retx])
            return
        self._execute(node, [action])

    def _handle_data(self, node: MobccnNode, data: Packet, frm: NodeId) -> None:
        types_before = node.cs.types()
        actions = process_data(node, data, frm, self.cache)
        if not actions and data.name in self.delivered_names[node.node_id]:
            self.sim.metrics.record_duplicate()
        self._execute(node, actions)
        if node.cs.types() != types_before:
            # a new content type in the CS changes what this node advertises
            for q in sorted(node.neighbors):
                self.sim.send(node.node_id, q, build_hello(node))

    def _execute(self, node: MobccnNode, actions: List[Action]) -> None:
        p = node.node_id
        for act in actions:
            pkt = act.packet
            if act.kind is ActionKind.RETURN_DATA:
                if act.to == p:
                    self._deliver_local(node, pkt)
                else:
                    self._send_data(node, act.to, pkt)
            elif act.kind is ActionKind.DELIVERED:
                self._deliver_local(node, pkt)
            elif act.kind is ActionKind.FORWARDED:
                if pkt.kind is PacketKind.DATA:
                    self._send_data(node, act.to, pkt)
                else:
                    self.sim.send(p, act.to, pkt)

    def _send_data(self, node: MobccnNode, face: NodeId, data: Packet) -> None:
        if face in node.neighbors:
            self.sim.send(node.node_id, face, data.hopped())
        else:
            node.data_outbox.setdefault(face, []).append(data)

    def _flush_data(self, node: MobccnNode, face: NodeId) -> None:
        for data in node.data_outbox.pop(face, []):
            self.sim.send(node.node_id, face, data.hopped())

    def _deliver_local(self, node: MobccnNode, data: Packet) -> None:
        p = node.node_id
        ids = self.pending[p].pop(data.name, [])
        for rid in ids:
            self.sim.metrics.record_delivery(rid, self.sim.now, data.hops)
        if ids:
            self.delivered_names[p].add(data.name)
