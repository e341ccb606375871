"""``oppsim`` command line: batch runs, trace generation and trace replay.

Exit codes: 0 success, 1 invalid configuration or input file, 2 runtime abort.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path
from typing import List, Optional

from .config import PROTOCOLS, ConfigError, ScenarioConfig, dump_config, load_config
from .engine import SimulationError, run
from .experiment import build_placement, build_trace, build_workload, make_protocol, multi_run
from .metrics import AccountingError, MetricsReport, aggregate, to_csv
from .mobility import TraceError, read_trace, write_trace
from .workload import WorkloadError, read_workload, write_workload


class InputError(Exception):
    """Bad user input; maps to exit code 1."""


def _on_off(v: str) -> bool:
    if v not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected on or off")
    return v == "on"


def _overrides(args) -> dict:
    kw = {}
    if getattr(args, "protocol", None) is not None:
        kw["protocol"] = args.protocol
    if getattr(args, "cache", None) is not None:
        kw["caching"] = args.cache
    if getattr(args, "retrans", None) is not None:
        kw["retransmission"] = args.retrans
    if getattr(args, "runs", None) is not None:
        kw["n_runs"] = args.runs
    if getattr(args, "seed", None) is not None:
        kw["base_seed"] = args.seed
    if getattr(args, "out", None) is not None and args.command == "run":
        kw["output"] = args.out
    return kw


def _load(args) -> ScenarioConfig:
    try:
        cfg = load_config(args.config)
    except FileNotFoundError:
        raise InputError(f"config: no such file or preset {args.config!r}") from None
    return cfg.with_(**_overrides(args))


def _jsonable(v):
    if isinstance(v, float) and math.isnan(v):
        return None
    return v


def _summary(cfg: ScenarioConfig, reports: List[MetricsReport], files: List[str]) -> dict:
    agg = aggregate(reports)
    return {
        "protocol": cfg.protocol_label(),
        "cache": cfg.caching,
        "retrans": cfg.retrans_effective(),
        "n_runs": agg.n_runs,
        "seeds": [cfg.base_seed + k for k in range(len(reports))],
        "mean": {k: _jsonable(v) for k, v in agg.mean.items()},
        "ci95": {k: _jsonable(v) for k, v in agg.ci95.items()},
        "config": {k: v for k, v in dataclasses.asdict(cfg).items()},
        "files": files,
    }


def _emit(cfg: ScenarioConfig, reports: List[MetricsReport], out: Path, plots: bool) -> None:
    out.mkdir(parents=True, exist_ok=True)
    csv_text = to_csv(reports)
    (out / "results.csv").write_text(csv_text)
    files = ["results.csv", "summary.json"]
    if plots:
        from .plots import plot_runs
        files += [p.name for p in plot_runs(reports, out)]
    (out / "summary.json").write_text(json.dumps(_summary(cfg, reports, files), indent=2) + "\n")
    sys.stdout.write(csv_text)


def cmd_run(args) -> int:
    cfg = _load(args)
    reports, _ = multi_run(cfg)
    _emit(cfg, reports, Path(cfg.output), not args.no_plots)
    return 0


def cmd_gen_trace(args) -> int:
    cfg = _load(args)
    seed = cfg.base_seed
    write_trace(build_trace(cfg, seed), args.out)
    if args.workload:
        write_workload(build_workload(cfg, seed).requests, args.workload)
    return 0


def cmd_replay(args) -> int:
    cfg = _load(args)
    trace = read_trace(args.trace, cfg.n_nodes)
    if trace.n_nodes != cfg.n_nodes:
        raise InputError(f"trace: {trace.n_nodes} nodes, config expects {cfg.n_nodes}")
    reqs = read_workload(args.workload)
    for r in reqs:
        if not 0 <= r.consumer < cfg.n_nodes:
            raise InputError(f"workload: consumer {r.consumer} outside 0..{cfg.n_nodes - 1}")
    _, placement = build_placement(cfg, cfg.base_seed)
    protocol = make_protocol(cfg, placement, cfg.base_seed)
    report = run(trace, reqs, protocol, duration=cfg.duration, sizes=cfg.sizes())
    _emit(cfg, [report], Path(args.out or cfg.output), not args.no_plots)
    return 0


def cmd_show_config(args) -> int:
    sys.stdout.write(dump_config(_load(args)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="oppsim",
                                description="Opportunistic content-centric networking simulator")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, with_proto=True):
        sp.add_argument("--config", required=True,
                        help="config file, or a bundled preset (scenario_a, scenario_b)")
        sp.add_argument("--seed", type=int, help="base seed (run k uses seed + k)")
        if with_proto:
            sp.add_argument("--protocol", choices=PROTOCOLS)
            sp.add_argument("--cache", type=_on_off, metavar="on|off")
            sp.add_argument("--retrans", type=_on_off, metavar="on|off")

    r = sub.add_parser("run", help="run a batch of seeded simulations")
    common(r)
    r.add_argument("--runs", type=int)
    r.add_argument("--out", help="output directory (default: config 'output')")
    r.add_argument("--no-plots", action="store_true", help="skip the PNG figures")
    r.set_defaults(func=cmd_run)

    g = sub.add_parser("gen-trace", help="write the contact trace (and workload) for one seed")
    common(g, with_proto=False)
    g.add_argument("--out", required=True, help="trace file")
    g.add_argument("--workload", help="also write the request workload here")
    g.set_defaults(func=cmd_gen_trace)

    rp = sub.add_parser("replay", help="run one simulation on a stored trace and workload")
    common(rp)
    rp.add_argument("--trace", required=True)
    rp.add_argument("--workload", required=True)
    rp.add_argument("--out")
    rp.add_argument("--no-plots", action="store_true")
    rp.set_defaults(func=cmd_replay)

    s = sub.add_parser("show-config", help="print the fully resolved configuration")
    common(s)
    s.set_defaults(func=cmd_show_config)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors; those are validation failures here
        return 0 if e.code == 0 else 1
    try:
        return args.func(args)
    except (ConfigError, InputError, TraceError, WorkloadError) as e:
        print(f"oppsim: error: {e}", file=sys.stderr)
        return 1
    except (SimulationError, AccountingError, OSError) as e:
        print(f"oppsim: aborted: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
