"""Epidemic-family comparison protocols.

``IdealEpidemic`` floods Interests and Data to every encountered node.
``Epi1Copy`` lets a single copy of each Interest random-walk across contacts and
returns Data over the PIT breadcrumbs; its noReTrans variant absorbs an Interest
at any node that already forwarded one for the same content.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Set

import numpy as np

from .core import ContentName, NodeId, Packet, PacketKind
from .engine import Protocol
from .forwarding import process_data
from .tables import ContentStore, Pit, PitResult, cs_lookup, pit_register


class _Consumers:
    """Pending-request bookkeeping shared by the baselines."""

    def __init__(self, n_nodes: int):
        self.pending: List[Dict[ContentName, List[int]]] = [defaultdict(list) for _ in range(n_nodes)]
        self.delivered_names: List[Set[ContentName]] = [set() for _ in range(n_nodes)]

    def deliver(self, sim, p: NodeId, name: ContentName, hops: int) -> bool:
        ids = self.pending[p].pop(name, [])
        for rid in ids:
            sim.metrics.record_delivery(rid, sim.now, hops)
        if ids:
            self.delivered_names[p].add(name)
            return True
        if name in self.delivered_names[p]:
            sim.metrics.record_duplicate()
        return False


@dataclass
class _EpiNode:
    node_id: NodeId
    cs: ContentStore = field(default_factory=ContentStore)
    # hop count of the copy each name arrived with (flooded caches)
    cs_hops: Dict[ContentName, int] = field(default_factory=dict)
    interests: Dict[int, Packet] = field(default_factory=dict)
    replies: Dict[int, Packet] = field(default_factory=dict)
    # name -> hops of the first Data copy of that name held here
    have: Dict[ContentName, int] = field(default_factory=dict)


class IdealEpidemic(Protocol):
    """Anti-entropy flooding of Interests and Data.

    With caching on, Content Stores themselves are flooded, so every node ends
    up holding every content reachable from a producer. With caching off only
    Data replies flood; each Interest instance reaching a producer spawns its
    own reply, and any copy of a name satisfies a consumer.
    """

    name = "epidemic_ideal"
    retrans = False

    def __init__(self, n_nodes: int, placement: Mapping[NodeId, Set[ContentName]],
                 cache: bool = True, payload_bytes: int = 1024):
        self.cache = cache
        self.payload_bytes = payload_bytes
        self.nodes = [_EpiNode(k) for k in range(n_nodes)]
        self.produced: List[Set[ContentName]] = [set() for _ in range(n_nodes)]
        for k, names in placement.items():
            for n in names:
                n = ContentName(*n)
                self.nodes[k].cs.insert(n, payload_bytes)
                self.nodes[k].cs_hops[n] = 0
                self.nodes[k].have[n] = 0
                self.produced[k].add(n)
        self.consumers = _Consumers(n_nodes)

    def contact_up(self, a, b):
        self._sync(a, b)
        self._sync(b, a)

    def request(self, req):
        c = self.nodes[req.consumer]
        name = ContentName(*req.name)
        if name in c.have:
            self.consumers.pending[c.node_id][name].append(req.request_id)
            self.consumers.deliver(self.sim, c.node_id, name, 0)
            self._keep(c, name, 0)
            return
        self.consumers.pending[c.node_id][name].append(req.request_id)
        interest = Packet.interest(name, c.node_id, req.request_id)
        c.interests[req.request_id] = interest
        self._spread_interest(c, interest)

    def receive(self, src, dst, packet):
        node = self.nodes[dst]
        if packet.kind is PacketKind.INTEREST:
            self._spread_interest(node, packet)
            if packet.name in self.produced[dst] and not self.cache:
                rid = packet.request_id
                if rid not in node.replies:
                    reply = Packet.data(packet.name, self.payload_bytes, 0, rid)
                    node.replies[rid] = reply
                    self._spread_reply(node, reply)
            return
        name = packet.name
        first = name not in node.have
        if first:
            node.have[name] = packet.hops
        if packet.request_id is None:
            node.cs_hops[name] = packet.hops
            node.cs.insert(name, packet.payload_bytes)
            self._spread_cs(node, name)
        else:
            self._spread_reply(node, packet)
        if self.consumers.deliver(self.sim, dst, name, packet.hops):
            self._keep(node, name, packet.hops)

    def cache_count(self):
        return sum(len(n.cs) for n in self.nodes)

    def live_interest_copies(self):
        return Counter(rid for n in self.nodes for rid in n.interests)

    # internals

    def _keep(self, node: _EpiNode, name: ContentName, hops: int) -> None:
        """Consumers always store what they asked for."""
        if node.cs.insert(name, self.payload_bytes):
            node.cs_hops[name] = hops

    def _sync(self, a: NodeId, b: NodeId) -> None:
        na = self.nodes[a]
        for rid in sorted(na.interests):
            self._push_interest(na, b, na.interests[rid])
        if self.cache:
            for name in sorted(na.cs.entries):
                self._push_cs(na, b, name)
        else:
            for rid in sorted(na.replies):
                self._push_reply(na, b, na.replies[rid])

    def _push_interest(self, src: _EpiNode, q: NodeId, pkt: Packet) -> None:
        dst = self.nodes[q]
        if pkt.request_id not in dst.interests:
            dst.interests[pkt.request_id] = pkt
            self.sim.send(src.node_id, q, pkt)

    def _push_reply(self, src: _EpiNode, q: NodeId, pkt: Packet) -> None:
        dst = self.nodes[q]
        if pkt.request_id not in dst.replies:
            copy = pkt.hopped()
            dst.replies[pkt.request_id] = copy
            self.sim.send(src.node_id, q, copy)

    def _push_cs(self, src: _EpiNode, q: NodeId, name: ContentName) -> None:
        dst = self.nodes[q]
        if name not in dst.cs:
            # reserve the slot now so concurrent pushes in this instant are not doubled
            dst.cs.insert(name, src.cs.entries[name])
            pkt = Packet.data(name, src.cs.entries[name], src.cs_hops.get(name, 0) + 1)
            self.sim.send(src.node_id, q, pkt)

    def _spread_interest(self, node: _EpiNode, pkt: Packet) -> None:
        for q in sorted(self.sim.neighbors[node.node_id]):
            self._push_interest(node, q, pkt)

    def _spread_reply(self, node: _EpiNode, pkt: Packet) -> None:
        for q in sorted(self.sim.neighbors[node.node_id]):
            self._push_reply(node, q, pkt)

    def _spread_cs(self, node: _EpiNode, name: ContentName) -> None:
        for q in sorted(self.sim.neighbors[node.node_id]):
            self._push_cs(node, q, name)


@dataclass
class _WalkNode:
    node_id: NodeId
    cs: ContentStore = field(default_factory=ContentStore)
    pit: Pit = field(default_factory=Pit)
    outbox: Dict[ContentName, Packet] = field(default_factory=dict)
    neighbors: Set[NodeId] = field(default_factory=set)
    # request id -> carried Interest
    carry: Dict[int, Packet] = field(default_factory=dict)
    # request id -> neighbours already offered this Interest during the current contact
    tried: Dict[int, Set[NodeId]] = field(default_factory=dict)
    data_outbox: Dict[NodeId, List[Packet]] = field(default_factory=dict)


class Epi1Copy(Protocol):
    def __init__(self, n_nodes: int, placement: Mapping[NodeId, Set[ContentName]],
                 rng: np.random.Generator, cache: bool = True, retrans: bool = True,
                 forward_prob: float = 0.5, payload_bytes: int = 1024):
        if not 0 < forward_prob <= 1:
            raise ValueError("forward_prob must be in (0, 1]")
        self.name = "epi1copy" if retrans else "epi1copy_noretrans"
        self.cache = cache
        self.retrans = retrans
        self.forward_prob = forward_prob
        self.rng = rng
        self.nodes = [_WalkNode(k) for k in range(n_nodes)]
        for k, names in placement.items():
            for n in names:
                self.nodes[k].cs.insert(ContentName(*n), payload_bytes)
        self.consumers = _Consumers(n_nodes)

    def contact_up(self, a, b):
        na, nb = self.nodes[a], self.nodes[b]
        na.neighbors.add(b)
        nb.neighbors.add(a)
        for node, face in ((na, b), (nb, a)):
            for data in node.data_outbox.pop(face, []):
                self.sim.send(node.node_id, face, data.hopped())
        for node, other in ((na, b), (nb, a)):
            for rid in sorted(node.carry):
                if rid in node.carry:
                    self.epi1copy_on_contact(node, other, rid)

    def contact_down(self, a, b):
        for node, other in ((self.nodes[a], b), (self.nodes[b], a)):
            node.neighbors.discard(other)
            for tried in node.tried.values():
                tried.discard(other)

    def epi1copy_on_contact(self, holder: _WalkNode, q: NodeId, rid: int) -> bool:
        """Offers one carried Interest to neighbour q. Returns True if it moved."""
        tried = holder.tried.setdefault(rid, set())
        if q in tried:
            return False
        tried.add(q)
        if self.rng.random() >= self.forward_prob:
            return False
        pkt = holder.carry.pop(rid)
        holder.tried.pop(rid, None)
        self.sim.send(holder.node_id, q, pkt)
        return True

    def request(self, req):
        node = self.nodes[req.consumer]
        name = ContentName(*req.name)
        self.consumers.pending[node.node_id][name].append(req.request_id)
        if name in node.cs:
            self.consumers.deliver(self.sim, node.node_id, name, 0)
            return
        self._accept(node, Packet.interest(name, node.node_id, req.request_id), node.node_id)

    def receive(self, src, dst, packet):
        node = self.nodes[dst]
        if packet.kind is PacketKind.INTEREST:
            data = cs_lookup(node.cs, packet.name)
            if data is not None:
                self.sim.send(dst, src, data.hopped())
                return
            self._accept(node, packet, src)
            return
        actions = process_data(node, packet, src, self.cache)
        if not actions:
            if packet.name in self.consumers.delivered_names[dst]:
                self.sim.metrics.record_duplicate()
            return
        for rid in [r for r, p in node.carry.items() if p.name == packet.name]:
            del node.carry[rid]
            node.tried.pop(rid, None)
        for act in actions:
            if act.to == node.node_id:
                self.consumers.deliver(self.sim, dst, packet.name, packet.hops)
            elif act.to in node.neighbors:
                self.sim.send(dst, act.to, packet.hopped())
            else:
                node.data_outbox.setdefault(act.to, []).append(packet)

    def cache_count(self):
        return sum(len(n.cs) for n in self.nodes)

    def live_interest_copies(self):
        return Counter(rid for n in self.nodes for rid in n.carry)

    def _accept(self, node: _WalkNode, pkt: Packet, frm: NodeId) -> None:
        res = pit_register(node.pit, pkt.name, frm, pkt)
        if res is PitResult.FACE_ADDED and not self.retrans:
            return
        rid = pkt.request_id
        node.carry[rid] = pkt
        node.tried[rid] = {frm} if frm != node.node_id else set()
        for q in sorted(node.neighbors):
            if rid not in node.carry:
                break
            self.epi1copy_on_contact(node, q, rid)
