"""Command line entry point: ``trafficreaction <subcommand> [flags]``.

Exit status is 0 on success, 2 for configuration errors and 3 when a
numerical guard trips (CFL violation, density leaving [0, rho_max], a
domain error, or a failed Lyapunov decay check).
"""

from __future__ import annotations

import argparse
import sys

from .core import CflError, DomainError, NumericalGuardError
from .experiments import (
    KINDS,
    ConfigError,
    ExperimentConfig,
    default_jobs,
    load_config,
    run_accuracy,
    run_crn_export,
    run_ring_stability,
    run_simulate,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _n_list(text: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("cell counts must be positive")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trafficreaction",
                                     description="TRM traffic simulations, accuracy tables and CRN export.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in KINDS:
        p = sub.add_parser(name)
        p.add_argument("--config", metavar="PATH", help="JSON experiment config")
        p.add_argument("--out", metavar="DIR", default=".", help="output directory (default: .)")
        p.add_argument("--scheme", metavar="NAME", help="trm, lxf or godunov")
        p.add_argument("--n-cells", metavar="LIST", type=_n_list, help="e.g. 10,20,50")
        p.add_argument("--seed", metavar="INT", type=int)
        if name == "accuracy":
            p.add_argument("--jobs", type=int, default=None,
                           help="worker processes for the N sweep (default: CPU count, max 8)")
    return parser


def resolve_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig(kind=args.command)
    if cfg.kind != args.command:
        cfg = ExperimentConfig(**{**cfg.to_dict(), "kind": args.command})
    overrides = {"seed": args.seed, "n_cells": args.n_cells,
                 "schemes": [args.scheme] if args.scheme else None}
    return cfg.with_overrides(**overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "accuracy":
            runs = run_accuracy(cfg, args.out, jobs=args.jobs or default_jobs())
            print("scheme,N,l1,linf")
            for r in runs:
                print(r.report.csv_row())
        elif args.command == "simulate":
            res = run_simulate(cfg, args.out)
            print(f"wrote {len(res.trajectory)} samples; CFL bound {res.cfl_bound:.6g}")
        elif args.command == "ring-stability":
            report = run_ring_stability(cfg, args.out)
            verdict = "PASS" if report.passed else "FAIL"
            print(f"{verdict}: monotone={report.monotone} bound_ok={report.bound_ok} "
                  f"worst_increase={report.worst_increase:.3e} worst_bound_gap={report.worst_bound_gap:.3e}")
            if not report.passed:
                return EXIT_NUMERIC
        else:
            res = run_crn_export(cfg, args.out)
            net = res["network"]
            print(f"{net.n_species} species, {net.n_complexes} complexes, {len(net.reactions)} reactions")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CflError, NumericalGuardError, DomainError) as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
