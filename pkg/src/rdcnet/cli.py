"""Command-line entry point: ``rdcnet run | generate | inspect``.

Exit codes: 0 success, 1 input error, 2 computation error. Log verbosity is
read from ``RDCNET_LOG_LEVEL`` (default ``WARNING``).
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

from rdcnet.config import RunConfig, load_config
from rdcnet.errors import ComputationError, InputError
from rdcnet.synthetic import SyntheticSpec, generate, parse_window_set

EXIT_OK, EXIT_INPUT, EXIT_COMPUTE = 0, 1, 2

log = logging.getLogger("rdcnet")


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rdcnet", description="Risk-dependent centrality of stock correlation networks.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="compute RDC, rankings and tests for every window")
    run.add_argument("--config", help="flat key = value configuration file")
    run.add_argument("--prices", dest="prices_path")
    run.add_argument("--index", dest="index_path")
    run.add_argument("--output-dir", "-o", dest="output_dir")
    run.add_argument("--first-month")
    run.add_argument("--last-month")
    run.add_argument("--window-length-months", type=int)
    run.add_argument("--step-months", type=int)
    run.add_argument("--coverage-threshold", type=float)
    run.add_argument("--min-overlap", type=int)
    run.add_argument("--zeta-start", type=float)
    run.add_argument("--zeta-end", type=float)
    run.add_argument("--zeta-step", type=float)
    run.add_argument("--top-bottom-k", type=int)
    run.add_argument("--weighted-adjacency", type=_bool, metavar="BOOL")
    run.add_argument("--write-correlation", type=_bool, metavar="BOOL")
    run.add_argument("--workers", type=int)

    gen = sub.add_parser("generate", help="write a seeded synthetic one-factor market")
    gen.add_argument("--prices", required=True, help="output price CSV")
    gen.add_argument("--index", required=True, help="output index CSV")
    gen.add_argument("--n-assets", type=int, default=250)
    gen.add_argument("--n-windows", type=int, default=145)
    gen.add_argument("--start-month", default="2008-01")
    gen.add_argument("--window-length-months", type=int, default=6)
    gen.add_argument("--step-months", type=int, default=1)
    gen.add_argument("--crisis-windows", default="", help='window indices, e.g. "0-7,60-70"')
    gen.add_argument("--beta-calm", type=float, default=0.35)
    gen.add_argument("--beta-crisis", type=float, default=0.85)
    gen.add_argument("--drift-calm", type=float, default=0.001)
    gen.add_argument("--drift-crisis", type=float, default=-0.004)
    gen.add_argument("--volatility", type=float, default=0.02)
    gen.add_argument("--missing-rate", type=float, default=0.0)
    gen.add_argument("--seed", type=int, default=0)

    ins = sub.add_parser("inspect", help="summarise one window of a finished run")
    ins.add_argument("window_id", help="YYYY-MM label of the window's first month")
    ins.add_argument("--output-dir", "-o", default=RunConfig.output_dir)
    return parser


def cmd_run(args) -> int:
    keys = [k for k in vars(args) if k not in ("command", "config")]
    config = load_config(args.config, {k: getattr(args, k) for k in keys})
    if not config.prices_path:
        raise InputError("no price file given (--prices or prices_path in the config)")
    from rdcnet.pipeline import run

    result = run(config)
    skipped = len(result.windows) - len(result.ok_windows)
    print(f"{len(result.ok_windows)} windows processed, {skipped} skipped; artifacts in {config.output_dir}")
    return EXIT_OK


def cmd_generate(args) -> int:
    try:
        spec = SyntheticSpec(
            n_assets=args.n_assets,
            n_windows=args.n_windows,
            start_month=args.start_month,
            window_length_months=args.window_length_months,
            step_months=args.step_months,
            crisis_windows=parse_window_set(args.crisis_windows),
            beta_calm=args.beta_calm,
            beta_crisis=args.beta_crisis,
            drift_calm=args.drift_calm,
            drift_crisis=args.drift_crisis,
            volatility=args.volatility,
            missing_rate=args.missing_rate,
            rng_seed=args.seed,
        )
    except ValueError as exc:
        raise InputError(f"invalid synthetic spec: {exc}") from None
    market = generate(spec, args.prices, args.index)
    print(f"wrote {len(market.assets)} assets x {len(market.dates)} days to {args.prices}; index to {args.index}")
    return EXIT_OK


def _listing(ordered: list[str]) -> list[tuple[int, str]]:
    n = len(ordered)
    keep = sorted(set(range(min(5, n))) | set(range(max(0, n - 5), n)))
    return [(i + 1, ordered[i]) for i in keep]


def cmd_inspect(args) -> int:
    out = Path(args.output_dir)
    ranks_path = out / f"rank_table_{args.window_id}.csv"
    stats_path = out / "window_stats.csv"
    if not ranks_path.exists() or not stats_path.exists():
        raise InputError(f"no artifacts for window {args.window_id!r} in {out}")
    by_zeta: dict[str, list[tuple[int, str]]] = {}
    with open(ranks_path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            by_zeta.setdefault(row["zeta"], []).append((int(row["rank"]), row["asset"]))
    stats = None
    with open(stats_path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            if row["window"] == args.window_id:
                stats = row
    if stats is None or not by_zeta:
        raise InputError(f"window {args.window_id!r} missing from {stats_path}")
    zetas = sorted(by_zeta, key=float)
    print(f"window {args.window_id}: {stats['n_assets']} assets")
    for z in (zetas[0], zetas[-1]):
        ordered = [a for _, a in sorted(by_zeta[z])]
        print(f"zeta = {z}:")
        for rank, asset in _listing(ordered):
            print(f"  {rank:4d}  {asset}")
    print(f"avg normalized rank std: {stats['avg_rank_std_norm']}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "generate": cmd_generate, "inspect": cmd_inspect}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("RDCNET_LOG_LEVEL", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ComputationError as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
