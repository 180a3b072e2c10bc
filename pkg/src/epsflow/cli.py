"""Command-line entry point for the experiment drivers.

Subcommands: convergence-space, convergence-time, eps-sweep, detector,
cpu-pareto, compute-m.  Each takes an optional JSON config file plus
--set key=value overrides for any ExperimentConfig field, and writes one
CSV per run.
"""

from __future__ import annotations

import argparse
import json
import sys

from .harness import (
    ExperimentConfig,
    compute_adsorption_length,
    convergence_space,
    convergence_time,
    cpu_pareto,
    detector_series,
    eps_sweep,
    report_rows,
    write_csv,
)


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _load_config(args) -> ExperimentConfig:
    overrides = {}
    for item in args.set or []:
        if "=" not in item:
            raise SystemExit(f"--set expects key=value, got {item!r}")
        key, _, value = item.partition("=")
        overrides[key.strip()] = _parse_value(value.strip())
    if args.config:
        return ExperimentConfig.from_file(args.config, overrides)
    return ExperimentConfig.from_dict(overrides)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with ExperimentConfig fields")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override one config field (repeatable)")
    p.add_argument("--out", default=None, help="output CSV path")


def _emit_report(report, out, default_name):
    header, rows = report_rows(report)
    path = out or default_name
    meta = dict(report.meta)
    for key, val in report.slopes.items():
        meta[f"slope[{key}]"] = f"{val:.4f}"
    write_csv(path, header, rows, report.config_hash, meta)
    print(f"wrote {path}")
    for key, val in report.slopes.items():
        print(f"  slope[{key}] = {val:.3f}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="epsflow",
        description="Convergence studies and probes for the oscillatory "
                    "advection-diffusion solvers.")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("convergence-space", "convergence-time", "detector",
                 "cpu-pareto"):
        p = sub.add_parser(name)
        _add_common(p)
    p = sub.add_parser("eps-sweep")
    _add_common(p)
    p.add_argument("--mode", choices=("time", "space"), default="time")

    p = sub.add_parser("compute-m", help="adsorption length from the "
                                         "Lennard-Jones layer integral")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--phi", type=float, default=1.0)
    p.add_argument("--cutoff", type=float, default=2.0)

    args = parser.parse_args(argv)

    if args.command == "compute-m":
        m = compute_adsorption_length(args.delta, args.phi, args.cutoff)
        print(format(m, ".17g"))
        return 0

    cfg = _load_config(args)

    if args.command == "convergence-space":
        _emit_report(convergence_space(cfg), args.out, "convergence_space.csv")
    elif args.command == "convergence-time":
        _emit_report(convergence_time(cfg), args.out, "convergence_time.csv")
    elif args.command == "eps-sweep":
        _emit_report(eps_sweep(cfg, mode=args.mode), args.out, "eps_sweep.csv")
    elif args.command == "detector":
        times, values = detector_series(cfg)
        path = args.out or "detector.csv"
        write_csv(path, ["t", "c_at_P"], list(zip(times, values)), cfg.hash(),
                  {"P": cfg.detector, "order": cfg.order, "dt": cfg.dt})
        print(f"wrote {path} ({len(times)} samples)")
    elif args.command == "cpu-pareto":
        rows = cpu_pareto(cfg)
        path = args.out or "cpu_pareto.csv"
        write_csv(path, ["order", "dt", "error", "seconds"], rows, cfg.hash(),
                  {"n": cfg.n, "epsilon": cfg.epsilon})
        print(f"wrote {path}")
    else:
        raise AssertionError(args.command)
    return 0


if __name__ == "__main__":
    sys.exit(main())
