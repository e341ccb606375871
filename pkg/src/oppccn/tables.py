"""Per-node CCN tables: Content Store, PIT, FIB and the current-neighbour utilities."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

from .core import DEFAULT_SIZES, ContentName, NodeId, Packet


class ContentStore:
    """Unlimited cache: ContentName -> payload size."""

    def __init__(self, entries: Optional[Dict[ContentName, int]] = None):
        self.entries: Dict[ContentName, int] = dict(entries or {})

    def insert(self, name: ContentName, payload_bytes: int = DEFAULT_SIZES.payload) -> bool:
        """Returns True if the name was not stored before."""
        if name in self.entries:
            return False
        self.entries[name] = payload_bytes
        return True

    def __contains__(self, name) -> bool:
        return name in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def types(self) -> set:
        return {n.content_type for n in self.entries}


def cs_lookup(cs: ContentStore, n: ContentName) -> Optional[Packet]:
    if n not in cs.entries:
        return None
    return Packet.data(n, cs.entries[n])


class PitResult(str, Enum):
    NEW_ENTRY = "NewEntry"
    FACE_ADDED = "FaceAdded"


@dataclass
class PitEntry:
    name: ContentName
    faces: List[NodeId]
    first_interest: Packet
    arrivals: int = 1
    satisfied: bool = False


class Pit:
    def __init__(self):
        self.entries: Dict[ContentName, PitEntry] = {}

    def get(self, name: ContentName) -> Optional[PitEntry]:
        return self.entries.get(name)

    def __contains__(self, name) -> bool:
        return name in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def satisfy(self, name: ContentName) -> Optional[PitEntry]:
        """Marks the entry satisfied and removes it."""
        entry = self.entries.pop(name, None)
        if entry is not None:
            entry.satisfied = True
        return entry


def pit_register(pit: Pit, n: ContentName, frm: NodeId, pkt: Packet) -> PitResult:
    entry = pit.entries.get(n)
    if entry is None:
        pit.entries[n] = PitEntry(name=n, faces=[frm], first_interest=pkt)
        return PitResult.NEW_ENTRY
    if frm not in entry.faces:
        entry.faces.append(frm)
    entry.arrivals += 1
    return PitResult.FACE_ADDED


@dataclass
class FibEntry:
    content_type: int
    per_neighbor: Dict[NodeId, float] = field(default_factory=dict)


class Fib:
    def __init__(self):
        self.entries: Dict[int, FibEntry] = {}

    def find(self, content_type: int) -> Optional[FibEntry]:
        return self.entries.get(content_type)

    def create(self, content_type: int, q: NodeId) -> FibEntry:
        entry = self.entries.setdefault(content_type, FibEntry(content_type))
        entry.per_neighbor.setdefault(q, 0.0)
        return entry

    def update(self, content_type: int, q: NodeId, utility: float) -> None:
        self.create(content_type, q).per_neighbor[q] = utility

    def values(self, content_type: int) -> Iterable[float]:
        entry = self.entries.get(content_type)
        return entry.per_neighbor.values() if entry else ()


class CnuTable:
    """Utilities advertised by neighbours currently in contact, keyed (type, node)."""

    def __init__(self):
        self.entries: Dict[Tuple[int, NodeId], float] = {}

    def store(self, content_type: int, q: NodeId, utility: float) -> None:
        self.entries[(content_type, q)] = utility

    def get(self, content_type: int, q: NodeId) -> Optional[float]:
        return self.entries.get((content_type, q))

    def remove_node(self, q: NodeId) -> None:
        for key in [k for k in self.entries if k[1] == q]:
            del self.entries[key]

    def nodes(self) -> set:
        return {q for _, q in self.entries}

    def for_type(self, content_type: int) -> Iterator[Tuple[NodeId, float]]:
        for (i, q), u in self.entries.items():
            if i == content_type:
                yield q, u


def best_forwarder(fib: Fib, cnu: CnuTable, content_type: int, current_neighbors,
                   exclude=()) -> Optional[Tuple[NodeId, float, bool]]:
    """Highest-utility next hop over CNU (live neighbours) and FIB.

    For an in-contact neighbour the advertised CNU value replaces its FIB value.
    Nodes in ``exclude`` (the faces an Interest arrived from) are never chosen.
    Ties go to the smallest NodeId.
    """
    candidates: Dict[NodeId, float] = {}
    entry = fib.find(content_type)
    if entry is not None:
        candidates.update(entry.per_neighbor)
    for q, u in cnu.for_type(content_type):
        if q in current_neighbors:
            candidates[q] = u
    for q in exclude:
        candidates.pop(q, None)
    if not candidates:
        return None
    node, util = min(candidates.items(), key=lambda kv: (-kv[1], kv[0]))
    return node, util, node in current_neighbors


def dump_tables(cs: ContentStore, pit: Pit, fib: Fib, cnu: CnuTable) -> List[str]:
    """Tab-separated debug dump, one line per table entry, in sorted order."""
    lines = []
    for n in sorted(cs.entries):
        lines.append(f"CS\t{n.content_type}\t{n.chunk}\t{cs.entries[n]}")
    for n in sorted(pit.entries):
        e = pit.entries[n]
        faces = ",".join(str(f) for f in e.faces)
        lines.append(f"PIT\t{n.content_type}\t{n.chunk}\t{faces}\t{e.arrivals}")
    for i in sorted(fib.entries):
        for q, u in sorted(fib.entries[i].per_neighbor.items()):
            lines.append(f"FIB\t{i}\t{q}\t{u:.9g}")
    for (i, q), u in sorted(cnu.entries.items()):
        lines.append(f"CNU\t{i}\t{q}\t{u:.9g}")
    return lines
