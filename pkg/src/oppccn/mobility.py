"""Community-based mobility and contact traces.

One community gives plain random waypoint over the whole area. With several
communities the area is split into a 2x2 grid of cells; each community lives in
its own home cell and one traveller per community occasionally heads for a
foreign community's cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

UP, DOWN = "UP", "DOWN"
TRACE_HEADER = "# oppnet-trace v1"


class TraceError(ValueError):
    """Malformed contact trace."""


@dataclass(frozen=True)
class MobilityConfig:
    area_side: float = 1000.0
    n_nodes: int = 10
    n_communities: int = 1
    n_travellers: int = 0
    tx_range: float = 20.0
    speed_min: float = 1.0
    speed_max: float = 1.86
    duration: float = 86400.0
    tick: float = 1.0
    burn_in: float = 7200.0
    foreign_prob: float = 0.5
    seed: int = 0

    def validate(self) -> None:
        if self.n_nodes < 1:
            raise ValueError("n_nodes must be positive")
        if self.area_side <= 0 or self.tx_range <= 0 or self.tick <= 0 or self.duration <= 0:
            raise ValueError("area_side, tx_range, tick and duration must be positive")
        if not 0 < self.speed_min <= self.speed_max:
            raise ValueError("need 0 < speed_min <= speed_max")
        if self.n_communities not in (1, 2, 3, 4):
            raise ValueError("n_communities must be between 1 and 4 (2x2 cell grid)")
        if self.n_travellers > self.n_communities or (self.n_communities == 1 and self.n_travellers):
            raise ValueError("at most one traveller per community, none with a single community")
        if self.n_nodes < self.n_communities:
            raise ValueError("fewer nodes than communities")
        if self.burn_in < 0 or not 0 <= self.foreign_prob <= 1:
            raise ValueError("burn_in must be >= 0 and foreign_prob in [0, 1]")


def community_of(cfg: MobilityConfig) -> List[int]:
    """Nodes are split into contiguous, equally sized blocks, one per community."""
    return [k * cfg.n_communities // cfg.n_nodes for k in range(cfg.n_nodes)]


def travellers(cfg: MobilityConfig) -> List[int]:
    """One traveller per community: the third member of the block (or the last
    member if the block is smaller)."""
    comm = community_of(cfg)
    out = []
    for c in range(cfg.n_travellers):
        members = [k for k, x in enumerate(comm) if x == c]
        out.append(members[min(2, len(members) - 1)])
    return out


def cell_bounds(cfg: MobilityConfig, community: int) -> Tuple[float, float, float, float]:
    """(xmin, ymin, xmax, ymax) of a community's home region."""
    if cfg.n_communities == 1:
        return (0.0, 0.0, cfg.area_side, cfg.area_side)
    half = cfg.area_side / 2
    cx, cy = community % 2, community // 2
    return (cx * half, cy * half, (cx + 1) * half, (cy + 1) * half)


def _waypoints(rng: np.random.Generator, cfg: MobilityConfig, home: int,
               traveller: bool, t_total: float):
    """Waypoint times and coordinates for one node, covering [0, t_total]."""
    bounds = [cell_bounds(cfg, c) for c in range(cfg.n_communities)]
    foreign = [c for c in range(cfg.n_communities) if c != home]

    def pick(cell):
        x0, y0, x1, y1 = bounds[cell]
        return rng.uniform(x0, x1), rng.uniform(y0, y1)

    times = [0.0]
    pts = [pick(home)]
    t = 0.0
    while t < t_total:
        cell = home
        if traveller and foreign and rng.random() < cfg.foreign_prob:
            cell = foreign[rng.integers(len(foreign))]
        nxt = pick(cell)
        speed = rng.uniform(cfg.speed_min, cfg.speed_max)
        dist = math.hypot(nxt[0] - pts[-1][0], nxt[1] - pts[-1][1])
        t += dist / speed
        times.append(t)
        pts.append(nxt)
    return np.asarray(times), np.asarray(pts)


def generate_positions(cfg: MobilityConfig, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Positions sampled every tick over [0, duration]: array (n_ticks, n_nodes, 2).

    Movement starts ``burn_in`` seconds before t=0 so the sampled window is
    close to the stationary regime.
    """
    cfg.validate()
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    comm = community_of(cfg)
    trav = set(travellers(cfg))
    sample_t = np.arange(0.0, cfg.duration + cfg.tick / 2, cfg.tick)
    out = np.empty((len(sample_t), cfg.n_nodes, 2))
    t_total = cfg.burn_in + cfg.duration
    for k in range(cfg.n_nodes):
        times, pts = _waypoints(rng, cfg, comm[k], k in trav, t_total)
        t = sample_t + cfg.burn_in
        out[:, k, 0] = np.interp(t, times, pts[:, 0])
        out[:, k, 1] = np.interp(t, times, pts[:, 1])
    return out


@dataclass
class ContactTrace:
    n_nodes: int
    events: List[Tuple[float, int, int, str]] = field(default_factory=list)

    def validate(self) -> None:
        open_pairs = set()
        last_t = -math.inf
        for t, a, b, kind in self.events:
            if t < last_t:
                raise TraceError(f"events out of order at t={t}")
            last_t = t
            if not 0 <= a < b < self.n_nodes:
                raise TraceError(f"bad pair ({a}, {b}) at t={t}")
            if kind == UP:
                if (a, b) in open_pairs:
                    raise TraceError(f"pair ({a}, {b}) up twice at t={t}")
                open_pairs.add((a, b))
            elif kind == DOWN:
                if (a, b) not in open_pairs:
                    raise TraceError(f"pair ({a}, {b}) down without up at t={t}")
                open_pairs.discard((a, b))
            else:
                raise TraceError(f"unknown event kind {kind!r}")

    def contacts(self) -> List[Tuple[int, int, float, Optional[float]]]:
        """(a, b, start, end) per contact; end is None for contacts open at the end."""
        start = {}
        out = []
        for t, a, b, kind in self.events:
            if kind == UP:
                start[(a, b)] = t
            else:
                out.append((a, b, start.pop((a, b)), t))
        out.extend((a, b, s, None) for (a, b), s in start.items())
        return sorted(out, key=lambda c: (c[2], c[0], c[1]))


def _sort_events(events):
    # DOWN before UP at equal times, then by pair
    return sorted(events, key=lambda e: (e[0], 0 if e[3] == DOWN else 1, e[1], e[2]))


def contacts_from_positions(positions: np.ndarray, tx_range: float, tick: float = 1.0,
                            t0: float = 0.0) -> ContactTrace:
    n_ticks, n, _ = positions.shape
    events = []
    if n < 2:
        return ContactTrace(n, events)
    ia, ib = np.triu_indices(n, k=1)
    times = t0 + np.arange(n_ticks) * tick
    chunk = max(1, 4_000_000 // n_ticks)
    for s in range(0, len(ia), chunk):
        a, b = ia[s:s + chunk], ib[s:s + chunk]
        d = positions[:, a, :] - positions[:, b, :]
        close = np.hypot(d[..., 0], d[..., 1]) <= tx_range
        padded = np.vstack([np.zeros((1, len(a)), bool), close])
        change = np.diff(padded.astype(np.int8), axis=0)
        tk, pk = np.nonzero(change)
        for t_idx, p_idx in zip(tk.tolist(), pk.tolist()):
            kind = UP if change[t_idx, p_idx] > 0 else DOWN
            events.append((float(times[t_idx]), int(a[p_idx]), int(b[p_idx]), kind))
    return ContactTrace(n, _sort_events(events))


def generate_trace(cfg: MobilityConfig, rng: Optional[np.random.Generator] = None) -> ContactTrace:
    pos = generate_positions(cfg, rng)
    return contacts_from_positions(pos, cfg.tx_range, cfg.tick)


def write_trace(trace: ContactTrace, path) -> None:
    with open(path, "w") as f:
        f.write(f"{TRACE_HEADER}\n")
        f.write(f"# nodes={trace.n_nodes}\n")
        for t, a, b, kind in trace.events:
            f.write(f"{t:.3f}\t{a}\t{b}\t{kind}\n")


def read_trace(path, n_nodes: Optional[int] = None) -> ContactTrace:
    events = []
    declared = None
    with open(path) as f:
        first = f.readline().rstrip("\n")
        if first != TRACE_HEADER:
            raise TraceError(f"{path}: missing header {TRACE_HEADER!r}")
        for lineno, line in enumerate(f, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                if line.startswith("# nodes="):
                    declared = int(line.split("=", 1)[1])
                continue
            parts = line.split("\t")
            if len(parts) != 4 or parts[3] not in (UP, DOWN):
                raise TraceError(f"{path}:{lineno}: bad event line {line!r}")
            a, b = int(parts[1]), int(parts[2])
            if a > b:
                a, b = b, a
            events.append((float(parts[0]), a, b, parts[3]))
    n = n_nodes or declared or (1 + max((e[2] for e in events), default=0))
    trace = ContactTrace(n, events)
    trace.validate()
    return trace


def inter_contact_times(trace: ContactTrace) -> dict:
    """Per pair, gaps between the end of one contact and the start of the next."""
    gaps = {}
    last_end = {}
    for a, b, s, e in trace.contacts():
        key = (a, b)
        if key in last_end and last_end[key] is not None:
            gaps.setdefault(key, []).append(s - last_end[key])
        last_end[key] = e
    return gaps
