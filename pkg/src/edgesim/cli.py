"""Command line entry points: `edgesim run` and `edgesim gridsearch`.

Exit codes: 0 on success, 2 on configuration errors, 1 on I/O or runtime
failure. --seed rebases the trial seeds and --out overrides the output
path; the EDGESIM_DATA_DIR environment variable prefixes relative IDX
dataset paths.
"""

import argparse
import sys
from dataclasses import replace

from .config import ConfigError, parse_config
from .sweep import grid_search_thresholds, run_sweep, summary_path


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="edgesim",
        description="Data-importance aware radio resource allocation simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("run", "execute the sweep described by CONFIG"),
                       ("gridsearch", "exhaustive threshold-pair search")):
        p = sub.add_parser(name, help=text)
        p.add_argument("config", help="YAML experiment config")
        p.add_argument("--seed", type=int, default=None,
                       help="rebase trial seeds to SEED..SEED+trials-1")
        p.add_argument("--out", default=None, help="override the output CSV path")
        if name == "gridsearch":
            p.add_argument("--grid", default=None,
                           help="comma-separated dB values overriding grid_db")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
    except ConfigError as e:
        print(f"edgesim: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"edgesim: cannot read config: {e}", file=sys.stderr)
        return 1

    if args.seed is not None:
        if args.seed < 0:
            print("edgesim: --seed must be nonnegative", file=sys.stderr)
            return 2
        cfg = replace(cfg, seeds=tuple(range(args.seed, args.seed + len(cfg.seeds))))
    if args.out is not None:
        cfg = replace(cfg, output=args.out)

    try:
        if args.command == "run":
            run_sweep(cfg)
            print(f"wrote {cfg.output} and {summary_path(cfg.output)}")
        else:
            grid = cfg.grid_db
            if args.grid is not None:
                try:
                    grid = tuple(float(v) for v in args.grid.split(","))
                except ValueError:
                    print(f"edgesim: --grid must be comma-separated numbers, "
                          f"got {args.grid!r}", file=sys.stderr)
                    return 2
            if not grid:
                print("edgesim: gridsearch needs grid_db in the config or --grid",
                      file=sys.stderr)
                return 2
            result = grid_search_thresholds(cfg, grid)
            print(f"best thresholds: gamma_high {result.best_high_db} dB, "
                  f"gamma_low {result.best_low_db} dB")
            print(f"wrote {cfg.output}")
    except OSError as e:
        print(f"edgesim: {e}", file=sys.stderr)
        return 1
    return 0


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
