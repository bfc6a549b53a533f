"""Command-line interface: train, eval, sweep, plot, selftest."""

from __future__ import annotations

import argparse
import logging
import os
import sys

import torch

from . import selftest as selftest_mod
from .config import ExperimentConfig, load_config, snr_points
from .sweep import SCHEMES, ResultsTable, emit_plots, run_sweep
from .training import Trainer


def _setup_logging(verbose: bool = True) -> None:
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stdout, force=True)


def _load(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if getattr(args, "seed", None) is not None:
        cfg = cfg.with_updates(seed=args.seed)
    cfg.validate()
    return cfg


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML experiment config (defaults used if omitted)")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")


def _cmd_train(args: argparse.Namespace) -> int:
    cfg = _load(args)
    out_dir = args.out or os.path.join("runs", args.scheme)
    trainer = Trainer(cfg, args.scheme, out_dir=out_dir)
    if args.resume:
        done = trainer.resume(args.resume)
        logging.getLogger("relayjscc").info(
            "resumed %s at completed stage %d", args.resume, done)
    if args.stage == "all":
        trainer.train_all()
    else:
        trainer.train_stage(int(args.stage))
    metrics = trainer.evaluate()
    print(f"final: psnr_db={metrics['psnr_db']:.3f} "
          f"accuracy={metrics['accuracy']:.4f}")
    print(f"checkpoints and logs in {out_dir}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    cfg = _load(args)
    trainer = Trainer(cfg, args.scheme, out_dir=None)
    trainer.resume(args.checkpoint)
    metrics = trainer.evaluate()
    lines = [f"{key}={value:.4f}" if isinstance(value, float) else f"{key}={value}"
             for key, value in sorted(metrics.items())]
    print("\n".join(lines))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "metrics.txt"), "w") as fh:
            fh.write("\n".join(lines) + "\n")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _load(args)
    schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
    points = snr_points(args.points) if args.points else None
    table = run_sweep(cfg, axis=args.axis, points=points, schemes=schemes,
                      out_dir=args.out, train_on_demand=not args.no_train)
    print(f"wrote {len(table)} rows to {os.path.join(args.out, 'results.csv')}")
    if not args.no_plots:
        for path in emit_plots(table, args.out):
            print(f"wrote {path}")
    return 0


def _cmd_plot(args: argparse.Namespace) -> int:
    table, _ = ResultsTable.load_csv(args.results)
    written = emit_plots(table, args.out)
    if not written:
        print("nothing to plot: the table has a single sweep point per axis")
        return 1
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_selftest(args: argparse.Namespace) -> int:
    torch.manual_seed(args.seed if args.seed is not None else 0)
    return selftest_mod.run(verbose=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relayjscc",
        description="Learned image transmission over a three-node relay "
                    "channel with joint reconstruction and classification.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="run the staged training procedure")
    _add_common(p)
    p.add_argument("--scheme", choices=SCHEMES, default="multitask")
    p.add_argument("--stage", choices=["1", "2", "3", "all"], default="all")
    p.add_argument("--out", help="output directory (default runs/<scheme>)")
    p.add_argument("--resume", help="checkpoint to continue from")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a stage checkpoint")
    _add_common(p)
    p.add_argument("--scheme", choices=SCHEMES, default="multitask")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", help="also write the metrics to this directory")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("sweep", help="train and evaluate over an SNR or relay-position grid")
    _add_common(p)
    p.add_argument("--axis", choices=["snr", "distance"], default="snr")
    p.add_argument("--points", help="comma-separated sweep points, e.g. -5,5,15 "
                                    "(dB for snr, source-relay distance otherwise)")
    p.add_argument("--schemes", default=",".join(SCHEMES),
                   help="comma-separated scheme list")
    p.add_argument("--out", required=True, help="directory for csv, checkpoints, plots")
    p.add_argument("--no-train", action="store_true",
                   help="only evaluate existing checkpoints; error when missing")
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("plot", help="render figures from a results csv")
    _add_common(p)
    p.add_argument("--results", required=True, help="results.csv from a sweep")
    p.add_argument("--out", required=True, help="directory for figures")
    p.set_defaults(func=_cmd_plot)

    p = sub.add_parser("selftest", help="run fast built-in invariant checks")
    _add_common(p)
    p.set_defaults(func=_cmd_selftest)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging()
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
