"""Scenario configuration: a flat ``key = value`` text format with two bundled presets."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .core import SizeModel
from .mobility import MobilityConfig, community_of, travellers
from .routing import RoutingParams
from .workload import Roles, TrafficConfig

PROTOCOLS = ("mobccn", "mobccn_noretrans", "epidemic_ideal", "epi1copy", "epi1copy_noretrans")
PRESETS = ("scenario_a", "scenario_b")


class ConfigError(ValueError):
    def __init__(self, key: str, msg: str):
        super().__init__(f"{key}: {msg}")
        self.key = key


def _on_off(v: str) -> bool:
    v = v.strip().lower()
    if v in ("on", "true", "yes", "1"):
        return True
    if v in ("off", "false", "no", "0"):
        return False
    raise ValueError(f"expected on/off, got {v!r}")


def _opt_float(v: str) -> Optional[float]:
    return None if v.strip().lower() in ("none", "") else float(v)


@dataclass(frozen=True)
class ScenarioConfig:
    # mobility
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
    # traffic
    n_producers: int = 4
    n_consumers: int = 1
    placement: str = "uniform"
    n_content_types: int = 10
    chunks_per_type: int = 25
    requests_per_consumer: int = 50
    inter_request: str = "geometric"
    inter_request_mean: float = 10000.0
    home_fraction: Optional[float] = None
    warmup_end_s: float = 43200.0
    request_end_s: float = 79200.0
    # protocol
    protocol: str = "mobccn"
    caching: bool = True
    retransmission: bool = True
    retransmission_threshold: int = 3
    forward_prob: float = 0.5
    u_cap: float = 1e6
    ict_init: float = 1000.0
    ict_estimator: str = "mean"
    ewma_weight: float = 0.5
    # packet sizes (bytes)
    hello_header_bytes: int = 8
    hello_record_bytes: int = 9
    interest_bytes: int = 16
    data_header_bytes: int = 16
    payload_bytes: int = 1024
    # runs
    n_runs: int = 10
    base_seed: int = 1
    output: str = "results"

    # derived views

    def mobility(self, seed: int = 0) -> MobilityConfig:
        names = {f.name for f in fields(MobilityConfig)}
        kw = {k: getattr(self, k) for k in names if hasattr(self, k)}
        return MobilityConfig(**{**kw, "seed": seed})

    def traffic(self) -> TrafficConfig:
        names = {f.name for f in fields(TrafficConfig)} - {"max_resample"}
        return TrafficConfig(**{k: getattr(self, k) for k in names})

    def routing(self) -> RoutingParams:
        return RoutingParams(self.u_cap, self.ict_init, self.ict_estimator, self.ewma_weight)

    def sizes(self) -> SizeModel:
        return SizeModel(self.hello_header_bytes, self.hello_record_bytes, self.interest_bytes,
                         self.data_header_bytes, self.payload_bytes)

    def family(self) -> str:
        return self.protocol.replace("_noretrans", "")

    def retrans_effective(self) -> bool:
        if self.protocol.endswith("_noretrans") or self.protocol == "epidemic_ideal":
            return False
        return self.retransmission

    def protocol_label(self) -> str:
        fam = self.family()
        if fam == "epidemic_ideal":
            return fam
        return fam if self.retrans_effective() else f"{fam}_noretrans"

    def roles(self) -> Roles:
        mob = self.mobility()
        comm = community_of(mob)
        trav = set(travellers(mob))
        free = {c: [k for k in range(self.n_nodes) if comm[k] == c and k not in trav]
                for c in range(self.n_communities)}

        def take(count):
            out = []
            for j in range(count):
                c = j % self.n_communities
                if not free[c]:
                    raise ConfigError("n_nodes", f"community {c} has too few members for its roles")
                out.append(free[c].pop(0))
            return out

        producers = take(self.n_producers)
        consumers = take(self.n_consumers)
        return Roles(producers, consumers, comm)

    def with_(self, **kw) -> "ScenarioConfig":
        for k in kw:
            if k not in _FIELD_TYPES:
                raise ConfigError(k, "unknown key")
        cfg = dataclasses.replace(self, **kw)
        cfg.validate()
        return cfg

    def validate(self) -> "ScenarioConfig":
        checks = [
            ("protocol", self.protocol in PROTOCOLS, f"must be one of {', '.join(PROTOCOLS)}"),
            ("n_nodes", self.n_nodes >= 1, "must be positive"),
            ("duration", self.duration > 0, "must be positive"),
            ("retransmission_threshold", self.retransmission_threshold >= 2, "must be >= 2"),
            ("forward_prob", 0 < self.forward_prob <= 1, "must be in (0, 1]"),
            ("u_cap", self.u_cap > 0, "must be positive"),
            ("ict_init", self.ict_init > 0, "must be positive"),
            ("ict_estimator", self.ict_estimator in ("mean", "ewma"), "must be mean or ewma"),
            ("ewma_weight", 0 < self.ewma_weight <= 1, "must be in (0, 1]"),
            ("n_runs", self.n_runs >= 1, "must be positive"),
            ("request_end_s", self.request_end_s <= self.duration, "must lie inside duration"),
            ("warmup_end_s", 0 <= self.warmup_end_s < self.request_end_s,
             "must be >= 0 and before request_end_s"),
            ("n_consumers", self.n_producers + self.n_consumers + self.n_travellers <= self.n_nodes,
             "producers + consumers + travellers exceed n_nodes"),
            ("home_fraction", self.home_fraction is None or self.n_communities > 1,
             "needs more than one community"),
        ]
        for key, ok, msg in checks:
            if not ok:
                raise ConfigError(key, msg)
        for key, check in (("n_nodes", self.mobility().validate),
                           ("n_producers", self.traffic().validate)):
            try:
                check()
            except ValueError as e:
                raise ConfigError(key, str(e)) from None
        self.roles()
        return self


_FIELD_TYPES = {f.name: f.type for f in fields(ScenarioConfig)}


def _parse_value(key: str, raw: str):
    default = getattr(ScenarioConfig, key)
    try:
        if key == "home_fraction":
            return _opt_float(raw)
        if isinstance(default, bool):
            return _on_off(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        return raw.strip()
    except ValueError as e:
        raise ConfigError(key, str(e)) from None


def parse_config(text: str, base: Optional[ScenarioConfig] = None) -> ScenarioConfig:
    values: Dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        if "=" not in s:
            raise ConfigError(f"line {lineno}", f"expected key = value, got {s!r}")
        key, raw = (x.strip() for x in s.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ConfigError(key, "unknown key")
        values[key] = _parse_value(key, raw)
    cfg = dataclasses.replace(base or ScenarioConfig(), **values)
    return cfg.validate()


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "on" if v else "off"
    if v is None:
        return "none"
    return repr(v) if isinstance(v, float) else str(v)


def dump_config(cfg: ScenarioConfig) -> str:
    lines = ["# oppccn scenario configuration"]
    for f in fields(ScenarioConfig):
        lines.append(f"{f.name} = {_format_value(getattr(cfg, f.name))}")
    return "\n".join(lines) + "\n"


def preset_text(name: str) -> str:
    return resources.files("oppccn.presets").joinpath(f"{name}.conf").read_text()


def load_config(path) -> ScenarioConfig:
    """Loads a config file, or a bundled preset when given its bare name."""
    p = str(path)
    if p in PRESETS:
        return parse_config(preset_text(p))
    return parse_config(Path(p).read_text())
