"""Deterministic discrete-event executor.

Contacts have infinite bandwidth: every packet handed to a node is processed at
the same instant, and the resulting sends cascade until the network is quiet.
"""

from __future__ import annotations

import heapq
import logging
from collections import Counter, deque
from dataclasses import dataclass
from typing import Callable, Deque, List, Optional, Sequence, Set, Tuple

from .core import DEFAULT_SIZES, NodeId, Packet, SizeModel
from .metrics import MetricsReport, RequestRecord
from .mobility import ContactTrace, TraceError, DOWN, UP
from .workload import Request

log = logging.getLogger(__name__)

# priorities at equal timestamps
PRIO_DOWN, PRIO_UP, PRIO_REQUEST, PRIO_END = 0, 1, 2, 3

MAX_CASCADE = 5_000_000


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Transmission:
    time: float
    src: NodeId
    dst: NodeId
    kind: str
    name: Optional[tuple]
    request_id: Optional[int]
    hops: int


class Protocol:
    """Hooks a forwarding scheme exposes to the engine."""

    name = "base"
    cache = True
    retrans = False

    def attach(self, sim: "Simulator") -> None:
        self.sim = sim

    def contact_up(self, a: NodeId, b: NodeId) -> None:
        pass

    def contact_down(self, a: NodeId, b: NodeId) -> None:
        pass

    def request(self, req: Request) -> None:
        raise NotImplementedError

    def receive(self, src: NodeId, dst: NodeId, packet: Packet) -> None:
        raise NotImplementedError

    def cache_count(self) -> int:
        """Total Content Store entries over all nodes."""
        return 0

    def live_interest_copies(self) -> Counter:
        """Live Interest copies per request instance, for global scans."""
        return Counter()


class Simulator:
    def __init__(self, n_nodes: int, protocol: Protocol, sizes: SizeModel = DEFAULT_SIZES,
                 record_packets: bool = False,
                 observer: Optional[Callable[["Simulator"], None]] = None):
        self.n_nodes = n_nodes
        self.protocol = protocol
        self.now = 0.0
        self.neighbors: List[Set[NodeId]] = [set() for _ in range(n_nodes)]
        self.metrics = MetricsReport(protocol=protocol.name, cache=protocol.cache,
                                     retrans=protocol.retrans, n_nodes=n_nodes, sizes=sizes)
        self.queue: Deque[Tuple[NodeId, NodeId, Packet]] = deque()
        self.record_packets = record_packets
        self.packet_log: List[Transmission] = []
        self.observer = observer
        protocol.attach(self)

    def in_contact(self, a: NodeId, b: NodeId) -> bool:
        return b in self.neighbors[a]

    def send(self, src: NodeId, dst: NodeId, packet: Packet, cls: Optional[str] = None) -> None:
        if dst not in self.neighbors[src]:
            raise SimulationError(f"t={self.now}: {src} sends to {dst} without a contact")
        self.metrics.record_transmission(packet, cls)
        if self.record_packets:
            self.packet_log.append(Transmission(self.now, src, dst, packet.kind.value,
                                                packet.name, packet.request_id, packet.hops))
        self.queue.append((src, dst, packet))

    def _drain(self) -> None:
        n = 0
        while self.queue:
            src, dst, packet = self.queue.popleft()
            self.protocol.receive(src, dst, packet)
            n += 1
            if n > MAX_CASCADE:
                raise SimulationError(f"t={self.now}: cascade did not terminate")

    def run(self, trace: ContactTrace, workload: Sequence[Request],
            duration: Optional[float] = None) -> MetricsReport:
        events = []
        seq = 0
        for (t, a, b, kind) in trace.events:
            prio = PRIO_UP if kind == UP else PRIO_DOWN
            events.append((t, prio, a, b, seq, None))
            seq += 1
        for req in workload:
            events.append((req.time, PRIO_REQUEST, req.consumer, req.request_id, seq, req))
            seq += 1
            self.metrics.add_request(RequestRecord(req.request_id, req.time, req.consumer,
                                                   tuple(req.name), req.home))
        end = duration if duration is not None else max([e[0] for e in events], default=0.0)
        if events and max(e[0] for e in events) > end:
            raise SimulationError("events beyond the simulation end")
        events.append((end, PRIO_END, 0, 0, seq, None))
        heapq.heapify(events)

        self.metrics.duration = end
        self.metrics.c_initial = self.protocol.cache_count()
        while events:
            t, prio, x, y, _, payload = heapq.heappop(events)
            self.now = t
            if prio == PRIO_UP:
                if y in self.neighbors[x]:
                    raise TraceError(f"t={t}: contact {x}-{y} up twice")
                self.neighbors[x].add(y)
                self.neighbors[y].add(x)
                self.protocol.contact_up(x, y)
            elif prio == PRIO_DOWN:
                if y not in self.neighbors[x]:
                    raise TraceError(f"t={t}: contact {x}-{y} down while not up")
                self.neighbors[x].discard(y)
                self.neighbors[y].discard(x)
                self.protocol.contact_down(x, y)
            elif prio == PRIO_REQUEST:
                self.protocol.request(payload)
            else:
                break
            self._drain()
            if self.observer is not None:
                self.observer(self)
        self.metrics.c_final = self.protocol.cache_count()
        return self.metrics


def run(trace: ContactTrace, workload: Sequence[Request], protocol: Protocol,
        duration: Optional[float] = None, sizes: SizeModel = DEFAULT_SIZES,
        **kwargs) -> MetricsReport:
    sim = Simulator(trace.n_nodes, protocol, sizes=sizes, **kwargs)
    return sim.run(trace, workload, duration)
