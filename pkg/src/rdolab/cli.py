"""Command line entry point: ``rdolab {gen,train,eval,report,export}``.

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from .errors import ConfigError, FormatError, NumericalError, RdoError
from .harness.config import load_config
from .harness.pipeline import evaluate_trained, fit, load_trained, save_trained
from .harness.report import read_metrics_csv, report, write_metrics_csv
from .pdegen.dataset import EXPERIMENTS, export_csv, load_dataset, make_dataset, save_dataset

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("rdolab")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which collides with the numerical code
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text):
    try:
        out = [int(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}")
    if not out:
        raise argparse.ArgumentTypeError("empty resolution list")
    return out


def build_parser():
    p = _Parser(prog="rdolab", description="Resolution-invariant deep operator experiments.")
    p.add_argument("-v", "--verbose", action="store_true", help="log training progress")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a multi-resolution dataset")
    g.add_argument("--experiment", required=True, choices=EXPERIMENTS)
    g.add_argument("--n", required=True, type=int, help="number of samples")
    g.add_argument("--resolutions", required=True, type=_int_list, help="e.g. 33,65,129")
    g.add_argument("--seed", required=True, type=int)
    g.add_argument("--out", required=True)
    g.add_argument("--workers", type=int, default=1)

    t = sub.add_parser("train", help="train a model described by a config file")
    t.add_argument("--config", required=True)
    t.add_argument("--data", required=True)
    t.add_argument("--out", required=True, help="checkpoint path; .arch and .history.csv go alongside")
    t.add_argument("--epochs", type=int)
    t.add_argument("--seed", type=int)

    e = sub.add_parser("eval", help="RL2E of a trained model on the test split")
    e.add_argument("--model", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--resolutions", required=True, type=_int_list)
    e.add_argument("--out", required=True, help="metrics CSV")
    e.add_argument("--no-timing", action="store_true", help="leave the seconds column empty")

    r = sub.add_parser("report", help="merge metric CSVs and draw RL2E charts")
    r.add_argument("--metrics", required=True, nargs="+")
    r.add_argument("--out", required=True)

    x = sub.add_parser("export", help="dump a dataset file as CSV")
    x.add_argument("--data", required=True)
    x.add_argument("--out", required=True)
    return p


def _gen(args):
    if args.n < 1 or args.workers < 1:
        raise UsageError("--n and --workers must be positive")
    try:
        ds = make_dataset(args.experiment, args.n, args.resolutions, args.seed, workers=args.workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    save_dataset(ds, args.out)
    print(f"wrote {args.out}: {args.experiment}, {args.n} samples at {ds.resolutions}")


def _train(args):
    cfg = load_config(args.config)
    if args.epochs is not None:
        if args.epochs < 1:
            raise UsageError("--epochs must be >= 1")
        cfg.train.epochs = args.epochs
    if args.seed is not None:
        cfg.train.seed = args.seed
    ds = load_dataset(args.data)
    model, history, _ = fit(cfg, ds)
    save_trained(model, cfg, history, args.out)
    best = min(h.val_rl2e for h in history)
    print(f"wrote {args.out}: {cfg.model.kind}, {len(history)} epochs, best val RL2E {best:.4%}")


def _eval(args):
    model, cfg = load_trained(args.model)
    ds = load_dataset(args.data)
    missing = [r for r in args.resolutions if r not in ds.blocks]
    if missing:
        raise UsageError(f"dataset has no resolution(s) {missing}; available {ds.resolutions}")
    records = evaluate_trained(model, cfg, ds, args.resolutions, timing=not args.no_timing)
    write_metrics_csv(records, args.out)
    for rec in records:
        cell = "n/a" if rec.rl2e is None else f"{rec.rl2e:.4%}"
        print(f"{rec.experiment} {rec.model} res {rec.test_res}: {cell}")


def _report(args):
    records = [rec for path in args.metrics for rec in read_metrics_csv(path)]
    if not records:
        raise UsageError("metric files contain no records")
    for path in report(records, args.out):
        print(f"wrote {path}")


def _export(args):
    paths = export_csv(load_dataset(args.data), args.out)
    print(f"wrote {len(paths)} CSV files to {args.out}")


_COMMANDS = {"gen": _gen, "train": _train, "eval": _eval, "report": _report, "export": _export}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("rdolab: a subcommand is required (gen, train, eval, report, export)")
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, FormatError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (RdoError, KeyError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
