"""Performance indices, run aggregation and CSV output."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import stats

from .core import DEFAULT_SIZES, Packet, PacketKind, SizeModel, size_bytes


class AccountingError(RuntimeError):
    """Raised when deliveries and requests do not reconcile."""


def cache_utilization(c_initial: int, c_final: int) -> float:
    if c_initial <= 0:
        raise ValueError("cache utilization undefined for an empty initial cache")
    return (c_final - c_initial) / c_initial * 100.0


@dataclass
class RequestRecord:
    request_id: int
    time: float
    consumer: int
    name: tuple
    home: Optional[bool] = None
    delivered_at: Optional[float] = None
    hops: Optional[int] = None


@dataclass
class MetricsReport:
    protocol: str = ""
    cache: bool = True
    retrans: bool = False
    requests: Dict[int, RequestRecord] = field(default_factory=dict)
    e2e_delay: List[float] = field(default_factory=list)
    hops: List[int] = field(default_factory=list)
    duplicates: int = 0
    bytes_interest: int = 0
    bytes_data: int = 0
    bytes_control: int = 0
    c_initial: int = 0
    c_final: int = 0
    n_nodes: int = 0
    duration: float = 0.0
    sizes: SizeModel = DEFAULT_SIZES

    def add_request(self, rec: RequestRecord) -> None:
        self.requests[rec.request_id] = rec

    def _rate(self, recs) -> float:
        recs = list(recs)
        if not recs:
            return math.nan
        return sum(r.delivered_at is not None for r in recs) / len(recs)

    @property
    def delivered(self) -> int:
        return sum(r.delivered_at is not None for r in self.requests.values())

    @property
    def delivery_rate(self) -> float:
        return self._rate(self.requests.values())

    @property
    def delivery_rate_home(self) -> float:
        return self._rate(r for r in self.requests.values() if r.home is True)

    @property
    def delivery_rate_foreign(self) -> float:
        return self._rate(r for r in self.requests.values() if r.home is False)

    @property
    def delay_mean(self) -> float:
        return float(np.mean(self.e2e_delay)) if self.e2e_delay else math.nan

    @property
    def delay_median(self) -> float:
        return float(np.median(self.e2e_delay)) if self.e2e_delay else math.nan

    @property
    def hops_mean(self) -> float:
        return float(np.mean(self.hops)) if self.hops else math.nan

    @property
    def bytes_total(self) -> int:
        return self.bytes_interest + self.bytes_data + self.bytes_control

    @property
    def cache_util_pct(self) -> float:
        if self.c_initial <= 0:
            return math.nan
        return cache_utilization(self.c_initial, self.c_final)

    @property
    def control_rate_per_node(self) -> float:
        """Routing traffic in bytes per second per node."""
        if not self.n_nodes or not self.duration:
            return math.nan
        return self.bytes_control / (self.n_nodes * self.duration)

    def record_delivery(self, request_id: int, delivery_time: float, hop_count: int) -> bool:
        """Returns True for a first delivery, False when counted as duplicate."""
        rec = self.requests.get(request_id)
        if rec is None:
            raise AccountingError(f"delivery for unknown request {request_id}")
        if delivery_time < rec.time:
            raise AccountingError(f"request {request_id} delivered before it was issued")
        if rec.delivered_at is not None:
            self.duplicates += 1
            return False
        rec.delivered_at = delivery_time
        rec.hops = hop_count
        self.e2e_delay.append(delivery_time - rec.time)
        self.hops.append(hop_count)
        return True

    def record_duplicate(self) -> None:
        self.duplicates += 1

    def record_transmission(self, packet: Packet, cls: Optional[str] = None) -> int:
        if cls is None:
            cls = {PacketKind.HELLO: "control", PacketKind.INTEREST: "interest",
                   PacketKind.DATA: "data"}[packet.kind]
        n = size_bytes(packet, self.sizes)
        if cls == "control":
            self.bytes_control += n
        elif cls == "interest":
            self.bytes_interest += n
        elif cls == "data":
            self.bytes_data += n
        else:
            raise ValueError(f"unknown traffic class {cls!r}")
        return n

    def row(self) -> Dict[str, float]:
        return {
            "delivery_rate": self.delivery_rate,
            "delivery_home": self.delivery_rate_home,
            "delivery_foreign": self.delivery_rate_foreign,
            "delay_mean_s": self.delay_mean,
            "delay_median_s": self.delay_median,
            "bytes_interest": self.bytes_interest,
            "bytes_data": self.bytes_data,
            "bytes_control": self.bytes_control,
            "hops_mean": self.hops_mean,
            "duplicates": self.duplicates,
            "cache_util_pct": self.cache_util_pct,
        }


METRIC_COLUMNS = ["delivery_rate", "delivery_home", "delivery_foreign", "delay_mean_s",
                  "delay_median_s", "bytes_interest", "bytes_data", "bytes_control",
                  "hops_mean", "duplicates", "cache_util_pct"]
CSV_COLUMNS = (["run", "protocol", "cache", "retrans"] + METRIC_COLUMNS
               + [f"{c}_ci95" for c in METRIC_COLUMNS])


@dataclass
class Aggregate:
    n_runs: int
    mean: Dict[str, float]
    ci95: Dict[str, Optional[float]]


def t_halfwidth(values: Sequence[float], confidence: float = 0.95) -> Optional[float]:
    x = np.asarray(values, dtype=float)
    if len(x) < 2:
        return None
    if np.isnan(x).any():
        return math.nan
    sd = x.std(ddof=1)
    if sd == 0:
        return 0.0
    return float(stats.t.ppf(0.5 + confidence / 2, len(x) - 1) * sd / math.sqrt(len(x)))


def aggregate(reports: Sequence[MetricsReport]) -> Aggregate:
    rows = [r.row() for r in reports]
    mean, ci = {}, {}
    for c in METRIC_COLUMNS:
        vals = [row[c] for row in rows]
        mean[c] = float(np.mean(vals)) if vals else math.nan
        ci[c] = t_halfwidth(vals)
    return Aggregate(len(reports), mean, ci)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return f"{v:.6f}"


def _on(flag: bool) -> str:
    return "on" if flag else "off"


def to_csv(reports: Sequence[MetricsReport], with_aggregate: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for k, r in enumerate(reports):
        vals = r.row()
        w.writerow([k, r.protocol, _on(r.cache), _on(r.retrans)]
                   + [_fmt(vals[c]) for c in METRIC_COLUMNS] + [""] * len(METRIC_COLUMNS))
    if with_aggregate and reports:
        agg = aggregate(reports)
        r0 = reports[0]
        w.writerow(["AGG", r0.protocol, _on(r0.cache), _on(r0.retrans)]
                   + [_fmt(agg.mean[c]) for c in METRIC_COLUMNS]
                   + [_fmt(agg.ci95[c]) for c in METRIC_COLUMNS])
    return buf.getvalue()


def read_csv(text: str) -> List[Dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))
