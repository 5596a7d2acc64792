"""Command line front end: run, sweep and compare subcommands.

Progress goes to stderr (suppressed by --quiet); results only ever go to
files, never to stdout. Exit code 0 means every configured equalizer ran and
every output file was written.
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import parse_config, serialize_config
from .errors import EqsimError
from .harness import compare_preset, emit_outputs, emit_sweep, run_experiment, sweep_experiment


def _load_config(path: Path):
    return parse_config(path.read_text(encoding="utf-8"))


def _apply_overrides(cfg, args):
    changed = False
    if args.seed is not None:
        cfg = replace(cfg, master_seed=args.seed)
        changed = True
    if args.out is not None:
        cfg = replace(cfg, output_dir=str(args.out))
        changed = True
    if changed:
        cfg = replace(cfg, source_text=serialize_config(cfg))
    return cfg


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eqsim",
        description="Channel equalization experiments: LMS, CMA, FSE-CMA and MLP equalizers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--seed", type=int, help="override master_seed")
        sp.add_argument("--out", type=Path, help="override the output directory")
        sp.add_argument("--quiet", action="store_true", help="suppress progress lines on stderr")

    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("config", type=Path)
    add_common(p_run)

    p_sweep = sub.add_parser("sweep", help="run the config at each SNR in a list")
    p_sweep.add_argument("config", type=Path)
    p_sweep.add_argument("--snr", required=True, metavar="LIST", help="comma-separated SNRs in dB")
    add_common(p_sweep)

    p_cmp = sub.add_parser("compare", help="four-equalizer comparison on a scenario")
    p_cmp.add_argument("config", type=Path, nargs="?", help="scenario config (default scenario if omitted)")
    add_common(p_cmp)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    progress = None if args.quiet else (lambda msg: print(f"[eqsim] {msg}", file=sys.stderr, flush=True))
    try:
        if args.command == "run":
            cfg = _apply_overrides(_load_config(args.config), args)
            emit_outputs(run_experiment(cfg, progress), cfg.output_dir)
        elif args.command == "sweep":
            cfg = _apply_overrides(_load_config(args.config), args)
            try:
                snrs = [float(tok) for tok in args.snr.split(",")]
            except ValueError:
                raise EqsimError(f"bad --snr list '{args.snr}'") from None
            emit_sweep(sweep_experiment(cfg, snrs, progress), cfg, cfg.output_dir)
        else:
            base = _load_config(args.config) if args.config else None
            cfg = _apply_overrides(compare_preset(base), args)
            emit_outputs(run_experiment(cfg, progress), cfg.output_dir)
    except (EqsimError, OSError) as exc:
        print(f"eqsim: error: {exc}", file=sys.stderr)
        return 1
    if progress:
        progress("done")
    return 0


if __name__ == "__main__":
    sys.exit(main())
