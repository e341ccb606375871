"""Binding configs, traces, workloads and protocols into seeded runs."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set

import numpy as np

from .config import ScenarioConfig
from .core import ContentName, NodeId
from .engine import Protocol, run
from .epidemic import Epi1Copy, IdealEpidemic
from .forwarding import MobccnProtocol
from .metrics import Aggregate, MetricsReport, aggregate
from .mobility import ContactTrace, generate_trace
from .workload import Request, Roles, generate_requests, place_content

STREAMS = ("mobility", "placement", "workload", "protocol")


def streams(seed: int) -> Dict[str, np.random.Generator]:
    """Independent named RNG streams derived from one run seed."""
    children = np.random.SeedSequence(seed).spawn(len(STREAMS))
    return {name: np.random.default_rng(ss) for name, ss in zip(STREAMS, children)}


@dataclass
class Workload:
    roles: Roles
    placement: Dict[NodeId, Set[ContentName]]
    requests: List[Request]


def build_trace(cfg: ScenarioConfig, seed: int) -> ContactTrace:
    return generate_trace(cfg.mobility(seed), streams(seed)["mobility"])


def build_placement(cfg: ScenarioConfig, seed: int):
    roles = cfg.roles()
    placement = place_content(cfg.traffic(), roles.producers, streams(seed)["placement"])
    return roles, placement


def build_workload(cfg: ScenarioConfig, seed: int) -> Workload:
    roles, placement = build_placement(cfg, seed)
    reqs = generate_requests(cfg.traffic(), placement, roles, streams(seed)["workload"])
    return Workload(roles, placement, reqs)


def make_protocol(cfg: ScenarioConfig, placement, seed: int) -> Protocol:
    fam = cfg.family()
    if fam == "mobccn":
        return MobccnProtocol(cfg.n_nodes, placement, cache=cfg.caching,
                              retrans=cfg.retrans_effective(),
                              threshold=cfg.retransmission_threshold,
                              params=cfg.routing(), payload_bytes=cfg.payload_bytes)
    if fam == "epidemic_ideal":
        return IdealEpidemic(cfg.n_nodes, placement, cache=cfg.caching,
                             payload_bytes=cfg.payload_bytes)
    if fam == "epi1copy":
        return Epi1Copy(cfg.n_nodes, placement, streams(seed)["protocol"], cache=cfg.caching,
                        retrans=cfg.retrans_effective(), forward_prob=cfg.forward_prob,
                        payload_bytes=cfg.payload_bytes)
    raise ValueError(f"unknown protocol {cfg.protocol!r}")


def run_once(cfg: ScenarioConfig, seed: int, trace: Optional[ContactTrace] = None,
             workload: Optional[Sequence[Request]] = None, **engine_kw) -> MetricsReport:
    if trace is None:
        trace = build_trace(cfg, seed)
    roles, placement = build_placement(cfg, seed)
    if workload is None:
        workload = generate_requests(cfg.traffic(), placement, roles, streams(seed)["workload"])
    protocol = make_protocol(cfg, placement, seed)
    return run(trace, workload, protocol, duration=cfg.duration, sizes=cfg.sizes(), **engine_kw)


def _run_index(args):
    cfg, seed = args
    return run_once(cfg, seed)


def n_workers() -> int:
    env = os.environ.get("OPPSIM_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def multi_run(cfg: ScenarioConfig, n_runs: Optional[int] = None,
              workers: Optional[int] = None) -> tuple[List[MetricsReport], Aggregate]:
    n = cfg.n_runs if n_runs is None else n_runs
    jobs = [(cfg, cfg.base_seed + k) for k in range(n)]
    workers = min(n_workers() if workers is None else workers, n)
    if workers <= 1:
        reports = [_run_index(j) for j in jobs]
    else:
        with ProcessPoolExecutor(workers) as pool:
            reports = list(pool.map(_run_index, jobs))
    return reports, aggregate(reports)
