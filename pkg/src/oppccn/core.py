"""Shared vocabulary: content names, packets and the byte-size model."""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import NamedTuple, Optional, Tuple

NodeId = int


class ContentName(NamedTuple):
    """A (content type, chunk) pair. Tuple ordering gives the lexicographic order."""

    content_type: int
    chunk: int

    def __str__(self) -> str:
        return f"{self.content_type}/{self.chunk}"


class HelloRecord(NamedTuple):
    content_type: int
    advertised_utility: float
    stored_locally: bool


class PacketKind(str, Enum):
    HELLO = "Hello"
    INTEREST = "Interest"
    DATA = "Data"


@dataclass(frozen=True)
class SizeModel:
    """Header sizes in bytes. The defaults are placeholders; no wire format is implied."""

    hello_header: int = 8
    hello_record: int = 9
    interest: int = 16
    data_header: int = 16
    payload: int = 1024


DEFAULT_SIZES = SizeModel()


@dataclass(frozen=True)
class Packet:
    kind: PacketKind
    hello_records: Tuple[HelloRecord, ...] = ()
    name: Optional[ContentName] = None
    origin: Optional[NodeId] = None
    payload_bytes: int = 0
    # bookkeeping only, never part of the size model
    request_id: Optional[int] = None
    hops: int = 0

    @classmethod
    def hello(cls, records=()) -> "Packet":
        return cls(PacketKind.HELLO, hello_records=tuple(records))

    @classmethod
    def interest(cls, name: ContentName, origin: NodeId, request_id: Optional[int] = None) -> "Packet":
        return cls(PacketKind.INTEREST, name=ContentName(*name), origin=origin, request_id=request_id)

    @classmethod
    def data(cls, name: ContentName, payload_bytes: int = DEFAULT_SIZES.payload, hops: int = 0,
             request_id: Optional[int] = None) -> "Packet":
        return cls(PacketKind.DATA, name=ContentName(*name), payload_bytes=payload_bytes,
                   hops=hops, request_id=request_id)

    def hopped(self) -> "Packet":
        return replace(self, hops=self.hops + 1)


def size_bytes(p: Packet, sizes: SizeModel = DEFAULT_SIZES) -> int:
    if p.kind is PacketKind.HELLO:
        return sizes.hello_header + sizes.hello_record * len(p.hello_records)
    if p.kind is PacketKind.INTEREST:
        return sizes.interest
    return sizes.data_header + p.payload_bytes


def name_matches(interest_name: ContentName, data_name: ContentName) -> bool:
    return tuple(interest_name) == tuple(data_name)
