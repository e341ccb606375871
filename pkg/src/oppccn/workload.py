"""Content placement and request generation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set

import numpy as np

from .core import ContentName, NodeId


class WorkloadError(ValueError):
    pass


@dataclass(frozen=True)
class Request:
    time: float
    consumer: NodeId
    name: ContentName
    request_id: int = 0
    home: Optional[bool] = None


@dataclass(frozen=True)
class TrafficConfig:
    n_producers: int = 4
    n_consumers: int = 1
    # "uniform": n_content_types types in total, each on a random producer;
    # "per_producer": every producer holds its own n_content_types types
    placement: str = "uniform"
    n_content_types: int = 10
    chunks_per_type: int = 25
    requests_per_consumer: int = 50
    inter_request: str = "geometric"
    inter_request_mean: float = 10000.0
    home_fraction: Optional[float] = None
    warmup_end_s: float = 43200.0
    request_end_s: float = 79200.0
    payload_bytes: int = 1024
    max_resample: int = 10000

    def validate(self, duration: Optional[float] = None) -> None:
        if self.n_producers < 1 or self.n_consumers < 0:
            raise ValueError("need at least one producer and a non-negative consumer count")
        if self.n_content_types < 1 or self.chunks_per_type < 1 or self.requests_per_consumer < 0:
            raise ValueError("content counts must be positive")
        if self.placement not in ("uniform", "per_producer"):
            raise ValueError(f"unknown placement {self.placement!r}")
        if self.inter_request not in ("geometric", "exponential"):
            raise ValueError(f"unknown inter_request law {self.inter_request!r}")
        if self.inter_request_mean <= 0 or (self.inter_request == "geometric"
                                            and self.inter_request_mean < 1):
            raise ValueError("inter_request_mean out of range")
        if not self.warmup_end_s < self.request_end_s:
            raise ValueError("warmup_end_s must precede request_end_s")
        if duration is not None and self.request_end_s > duration:
            raise ValueError("request_end_s beyond the simulation duration")
        if self.home_fraction is not None and not 0 <= self.home_fraction <= 1:
            raise ValueError("home_fraction must be in [0, 1]")


@dataclass(frozen=True)
class Roles:
    """Which nodes produce and consume, and their communities."""

    producers: List[NodeId]
    consumers: List[NodeId]
    community: List[int]


def place_content(cfg: TrafficConfig, producers: Sequence[NodeId],
                  rng: np.random.Generator) -> Dict[NodeId, Set[ContentName]]:
    placement: Dict[NodeId, Set[ContentName]] = {p: set() for p in producers}
    if not producers:
        return placement
    if cfg.placement == "uniform":
        owners = rng.integers(len(producers), size=cfg.n_content_types)
        for i, k in enumerate(owners.tolist()):
            placement[producers[k]].update(ContentName(i, c) for c in range(cfg.chunks_per_type))
    else:
        n_types = cfg.n_content_types * len(producers)
        perm = rng.permutation(n_types).tolist()
        for k, p in enumerate(producers):
            for i in perm[k * cfg.n_content_types:(k + 1) * cfg.n_content_types]:
                placement[p].update(ContentName(i, c) for c in range(cfg.chunks_per_type))
    return placement


def _offsets(cfg: TrafficConfig, rng: np.random.Generator, n: int) -> np.ndarray:
    """Request offsets after warm-up, resampling any that overflow the window."""
    window = cfg.request_end_s - cfg.warmup_end_s
    out = np.empty(n)
    for k in range(n):
        for _ in range(cfg.max_resample):
            if cfg.inter_request == "geometric":
                x = float(rng.geometric(1.0 / cfg.inter_request_mean))
            else:
                x = round(float(rng.exponential(cfg.inter_request_mean)), 3)
            if x <= window:
                break
        else:
            raise WorkloadError(f"could not fit a request into [{cfg.warmup_end_s}, "
                                f"{cfg.request_end_s}] after {cfg.max_resample} draws")
        out[k] = x
    return out


def generate_requests(cfg: TrafficConfig, placement: Dict[NodeId, Set[ContentName]],
                      roles: Roles, rng: np.random.Generator) -> List[Request]:
    all_names = sorted(n for names in placement.values() for n in names)
    prod_comm = {p: roles.community[p] for p in placement}
    reqs = []
    for c in roles.consumers:
        n = cfg.requests_per_consumer
        times = np.round(cfg.warmup_end_s + _offsets(cfg, rng, n), 3)
        if cfg.home_fraction is None:
            idx = rng.integers(len(all_names), size=n)
            picks = [(all_names[i], None) for i in idx.tolist()]
        else:
            home = sorted(nm for p, names in placement.items()
                          if prod_comm[p] == roles.community[c] for nm in names)
            foreign = sorted(nm for p, names in placement.items()
                             if prod_comm[p] != roles.community[c] for nm in names)
            n_home = int(round(cfg.home_fraction * n))
            flags = np.array([True] * n_home + [False] * (n - n_home))
            rng.shuffle(flags)
            picks = []
            for f in flags.tolist():
                pool = home if f else foreign
                if not pool:
                    raise WorkloadError(f"consumer {c} has no {'home' if f else 'foreign'} content")
                picks.append((pool[rng.integers(len(pool))], f))
        for t, (name, flag) in zip(times.tolist(), picks):
            reqs.append(Request(t, c, name, 0, flag))
    reqs.sort(key=lambda r: (r.time, r.consumer, r.name))
    return [Request(r.time, r.consumer, r.name, k, r.home) for k, r in enumerate(reqs)]


def write_workload(reqs: Sequence[Request], path) -> None:
    with open(path, "w") as f:
        for r in reqs:
            line = f"{r.time:.3f}\t{r.consumer}\t{r.name.content_type}\t{r.name.chunk}"
            if r.home is not None:
                line += "\thome" if r.home else "\tforeign"
            f.write(line + "\n")


def read_workload(path) -> List[Request]:
    reqs = []
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) not in (4, 5):
                raise WorkloadError(f"{path}:{lineno}: expected 4 tab-separated fields")
            home = None
            if len(parts) == 5:
                if parts[4] not in ("home", "foreign"):
                    raise WorkloadError(f"{path}:{lineno}: bad community flag {parts[4]!r}")
                home = parts[4] == "home"
            reqs.append(Request(float(parts[0]), int(parts[1]),
                                ContentName(int(parts[2]), int(parts[3])), len(reqs), home))
    return reqs
