"""MobCCN routing: utility model, inter-contact estimation and Hello handling."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Hashable, Iterable, List, Optional, Set

from .core import ContentName, HelloRecord, NodeId, Packet
from .tables import CnuTable, ContentStore, Fib, Pit

log = logging.getLogger(__name__)

U_CAP = 1e6
ICT_INIT = 1000.0


class IctEstimator:
    """Running inter-contact estimate per key (a node id or a content type).

    Gaps are measured between successive contact-begin instants. Zero gaps are
    ignored. ``kind`` is "mean" (arithmetic) or "ewma".
    """

    def __init__(self, kind: str = "mean", ewma_weight: float = 0.5):
        if kind not in ("mean", "ewma"):
            raise ValueError(f"unknown ict estimator {kind!r}")
        self.kind = kind
        self.ewma_weight = ewma_weight
        self.last_seen: Dict[Hashable, float] = {}
        self.mean_ict: Dict[Hashable, float] = {}
        self.samples: Dict[Hashable, int] = {}

    def record(self, key: Hashable, now: float) -> "IctEstimator":
        prev = self.last_seen.get(key)
        if prev is not None:
            if now < prev:
                raise ValueError(f"time went backwards for {key!r}: {now} < {prev}")
            gap = now - prev
            if gap > 0:
                n = self.samples.get(key, 0)
                if n == 0:
                    self.mean_ict[key] = gap
                elif self.kind == "mean":
                    self.mean_ict[key] += (gap - self.mean_ict[key]) / (n + 1)
                else:
                    w = self.ewma_weight
                    self.mean_ict[key] = w * gap + (1 - w) * self.mean_ict[key]
                self.samples[key] = n + 1
        self.last_seen[key] = now
        return self

    def mean(self, key: Hashable) -> Optional[float]:
        return self.mean_ict.get(key)

    def estimate(self, key: Hashable, default: float = ICT_INIT) -> float:
        m = self.mean_ict.get(key)
        return default if m is None else m


def ict_record_contact(est: IctEstimator, key: Hashable, now: float) -> IctEstimator:
    return est.record(key, now)


def direct_utility(ict_pi: Optional[float], u_cap: float = U_CAP) -> float:
    """Inverse inter-contact time towards a content type; 0 if never met."""
    if ict_pi is None:
        return 0.0
    if ict_pi < 0:
        raise ValueError("negative inter-contact time")
    if ict_pi * u_cap < 1.0:
        return u_cap
    return 1.0 / ict_pi


def indirect_utility(u_qi: float, ict_pq: float) -> float:
    if u_qi <= 0:
        return 0.0
    return 1.0 / (1.0 / u_qi + ict_pq)


def overall_utility(direct: float, indirects: Iterable[float] = ()) -> float:
    return max([direct, *indirects], default=0.0)


@dataclass
class UtilityTable:
    own_utility: Dict[int, float] = field(default_factory=dict)
    direct: Dict[int, float] = field(default_factory=dict)
    # lower bound on direct utility, used for initial content providers
    floor: Dict[int, float] = field(default_factory=dict)

    def recompute(self, content_type: int, fib: Fib) -> float:
        u = overall_utility(self.direct.get(content_type, 0.0), fib.values(content_type))
        self.own_utility[content_type] = u
        return u


@dataclass
class RoutingParams:
    u_cap: float = U_CAP
    ict_init: float = ICT_INIT
    ict_estimator: str = "mean"
    ewma_weight: float = 0.5


@dataclass
class MobccnNode:
    """Full MobCCN protocol state of one node."""

    node_id: NodeId
    params: RoutingParams = field(default_factory=RoutingParams)
    cs: ContentStore = field(default_factory=ContentStore)
    pit: Pit = field(default_factory=Pit)
    fib: Fib = field(default_factory=Fib)
    cnu: CnuTable = field(default_factory=CnuTable)
    utility: UtilityTable = field(default_factory=UtilityTable)
    # interests waiting for a suitable contact, one per name
    outbox: Dict[ContentName, Packet] = field(default_factory=dict)
    # data waiting for a breadcrumb face to come back into contact
    data_outbox: Dict[NodeId, List[Packet]] = field(default_factory=dict)
    neighbors: Set[NodeId] = field(default_factory=set)
    # content types already counted as met, per neighbour, for the current contact
    contact_types: Dict[NodeId, Set[int]] = field(default_factory=dict)
    malformed_records: int = 0

    def __post_init__(self):
        self.ict_nodes = IctEstimator(self.params.ict_estimator, self.params.ewma_weight)
        self.ict_types = IctEstimator(self.params.ict_estimator, self.params.ewma_weight)

    def make_provider(self, u_direct: Optional[float] = None) -> None:
        u = self.params.u_cap / 2 if u_direct is None else u_direct
        for i in sorted(self.cs.types()):
            self.utility.floor[i] = u
            self.utility.direct[i] = u
            self.utility.recompute(i, self.fib)


def build_hello(node: MobccnNode) -> Packet:
    stored = node.cs.types()
    records = []
    for i in sorted(set(node.utility.own_utility) | stored):
        u = node.utility.own_utility.get(i, 0.0)
        if u > 0 or i in stored:
            records.append(HelloRecord(i, u, i in stored))
    return Packet.hello(records)


def record_type_encounters(node: MobccnNode, hello: Packet, q: NodeId, now: float) -> None:
    """Counts a contact with a holder of type i as an encounter with type i.

    Each type counts once per contact with q, however many Hellos q sends.
    """
    seen = node.contact_types.setdefault(q, set())
    for rec in hello.hello_records:
        if rec.stored_locally and rec.content_type not in seen:
            seen.add(rec.content_type)
            node.ict_types.record(rec.content_type, now)


def process_hello(node: MobccnNode, hello: Packet, q: NodeId, now: float) -> MobccnNode:
    p = node.params
    for rec in hello.hello_records:
        i, u_qi, stored = rec
        if not (u_qi >= 0):
            node.malformed_records += 1
            log.debug("node %d: skipping malformed record %r from %d", node.node_id, rec, q)
            continue
        node.cnu.store(i, q, u_qi)
        if node.fib.find(i) is None or q not in node.fib.find(i).per_neighbor:
            node.fib.create(i, q)
        if stored:
            d = direct_utility(node.ict_types.estimate(i, p.ict_init), p.u_cap)
            d = max(d, node.utility.floor.get(i, 0.0))
            node.utility.direct[i] = d
            value = d
        else:
            value = indirect_utility(u_qi, node.ict_nodes.estimate(q, p.ict_init))
        node.fib.update(i, q, min(value, p.u_cap))
        node.utility.recompute(i, node.fib)
    return node


def contact_down(node: MobccnNode, q: NodeId) -> None:
    node.neighbors.discard(q)
    node.cnu.remove_node(q)
    node.contact_types.pop(q, None)
