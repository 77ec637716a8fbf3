"""``hct <subcommand> --config FILE [--seed N] [--threads N] [--out DIR] [--paper-scale]``.

Exit codes: 0 on success, 2 on a configuration error, 3 when a
numeric-validity flag is escalated (e.g. unreliable bootstrap draws).
"""
from __future__ import annotations

import argparse
import sys

from .config import EXPERIMENTS, load_config, resolve, with_overrides
from .csvio import write_csv
from .errors import ConfigError, EmptyGrid, InfiniteMoment, InsufficientResamples, NumericValidityError
from .experiments import RUNNERS, output_header, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hct", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="experiment config JSON (schema 1)")
        sp.add_argument("--seed", type=int, default=None, help="master seed, overrides the config")
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--out", default=None, help="output directory, overrides the config")
        sp.add_argument("--paper-scale", action="store_true", help="use paper-scale defaults")
    return ap


def _print_table(table) -> None:
    cols = ["alpha", "p_hat_boot", "p_hat_norm", "se"]
    idx = [table.columns.index(c) for c in cols]
    print("\t".join(cols))
    for row in table.rows:
        print("\t".join(f"{row[i]:.6g}" for i in idx))


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        cfg = load_config(args.config)
        if cfg.experiment != args.command:
            raise ConfigError(f"config is for {cfg.experiment!r}, not {args.command!r}")
        cfg = with_overrides(cfg, seed=args.seed, output_dir=args.out)
        if args.paper_scale:
            cfg = with_overrides(cfg, paper_scale=True)
        cfg = resolve(cfg)
        if args.command == "calibrate":
            tables = RUNNERS["calibrate"](cfg, args.threads)
            write_csv(f"{cfg.output_dir}/{tables[0].name}.csv", tables[0], output_header(cfg))
            _print_table(tables[0])
        else:
            for path in run_experiment(cfg, args.threads):
                print(path)
    except (ConfigError, EmptyGrid, InfiniteMoment, InsufficientResamples) as exc:
        print(f"hct: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericValidityError as exc:
        print(f"hct: numeric validity: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
