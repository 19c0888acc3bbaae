"""Command line entry point ``hypquad``.

Exit codes: 0 success, 1 config error, 2 verification failure,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

from . import pipeline
from .config import ConfigError, load

EXIT = {pipeline.OK: 0, pipeline.VERIFY: 2, pipeline.NUMERIC: 3}

STAGES = {
    "normal-form": ("normal_form",),
    "rescale": ("rescale",),
    "qtilde": ("qtilde",),
    "maxprinciple": ("maxprinciple",),
    "orbits": ("orbits",),
    "indices": ("indices",),
    "plan": ("qtilde", "orbits", "plan"),
    "run": None,
}


def example_config_path() -> Path:
    return Path(str(resources.files("hypquad") / "examples" / "saddle_island.json"))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hypquad", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in list(STAGES) + ["report"]:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, default=None,
                       help="experiment JSON (default: shipped example)")
        p.add_argument("--out", type=Path, default=None, help="output directory")
        if name == "report":
            continue
        p.add_argument("--epsilon", type=float, action="append", default=[])
        p.add_argument("--period", type=int, action="append", default=[])
        p.add_argument("--seeds", type=int, default=None, help="seed grid density")
        p.add_argument("--step", type=float, default=None, help="integrator step")
        p.add_argument("--grid", type=int, default=None, help="sup-norm grid density")
        p.add_argument("--quiet", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load(args.config or example_config_path())
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    out = Path(args.out or cfg.output)

    if args.command == "report":
        if not out.is_dir():
            print(f"config error: no report directory {out}", file=sys.stderr)
            return 1
        from .plotting import render_report
        for p in render_report(out):
            print(p)
        return 0

    periods = args.period or ([1] if args.command == "plan" else None)
    try:
        cfg = cfg.with_overrides(epsilon=args.epsilon, periods=periods,
                                 seed_density=args.seeds, step=args.step, grid=args.grid,
                                 output=str(out))
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    log = None if args.quiet else (lambda s: print(s, file=sys.stderr))
    summary = pipeline.run(cfg, out, log=log, stages=STAGES[args.command])
    print(f"{args.command}: {summary['status']} ({summary['elapsed_s']:.1f}s) -> {out}")
    return EXIT[summary["status"]]


if __name__ == "__main__":
    sys.exit(main())
