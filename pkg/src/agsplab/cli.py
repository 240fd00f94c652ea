"""Command-line interface: run, verify, entropy, and sweep subcommands."""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, parse_config
from .experiment import run_points, write_reports
from .hamiltonian import DimensionCeilingError
from .spectral import DegenerateGroundStateError


def _add_common(sub):
    sub.add_argument("config", help="experiment config file")
    sub.add_argument("--jobs", type=int, default=None, help="max concurrent grid workers")
    sub.add_argument("--out", default=None, help="output directory (overrides [output] dir)")
    sub.add_argument("--seed", type=int, default=None, help="seed for randomized checks")
    sub.add_argument(
        "--tolerance", type=float, default=None, help="comparison slack (default 1e-9)"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="agsplab",
        description="Verify truncation/filter/compression inequalities on long-range chains.",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    for name, descr in [
        ("run", "full pipeline: verify every bound and write all reports"),
        ("verify", "verify every bound; print one pass/fail line per bound id"),
        ("entropy", "ground-state entropies only (entropy.csv)"),
        ("sweep", "run the configured sweep grid (requires a [sweep] section)"),
    ]:
        _add_common(subs.add_parser(name, help=descr))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.jobs is not None:
        cfg.jobs = args.jobs
    if args.seed is not None:
        cfg.seed = args.seed
    if args.tolerance is not None:
        cfg.tolerance = args.tolerance
    out_dir = args.out or cfg.output_dir
    if args.command == "sweep" and not cfg.sweep_param:
        print("config error: sweep command needs a [sweep] section", file=sys.stderr)
        return 2
    try:
        points = run_points(cfg, entropy_only=(args.command == "entropy"))
    except (DimensionCeilingError, DegenerateGroundStateError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    paths = write_reports(cfg, points, out_dir=out_dir)
    failures = 0
    by_id: dict[str, list[bool]] = {}
    for point in points:
        for r in point.records:
            by_id.setdefault(r.bound_id, []).append(r.holds)
            failures += 0 if r.holds else 1
    for bid in sorted(by_id):
        oks = by_id[bid]
        status = "PASS" if all(oks) else "FAIL"
        print(f"{status}  {bid}  ({sum(oks)}/{len(oks)} checks)")
    if args.command == "entropy":
        print(f"wrote {paths['entropy']}")
        return 0
    print(f"wrote {paths['results']}, {paths['summary']}, {paths['entropy']}")
    return 0 if failures == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
