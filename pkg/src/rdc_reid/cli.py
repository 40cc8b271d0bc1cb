"""Command line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .descriptor import DEFAULT_EPS
from .divergence import METRICS, divergence
from .errors import DataError, NumericalError
from .evaluation import (
    METHODS,
    Experiment,
    describe_tree,
    generate_synthetic,
    load_dataset,
    run_experiment,
    save_dataset,
)
from .spd import load_spd

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3

log = logging.getLogger("rdc_reid")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _nonneg_float(text: str) -> float:
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError("must be a non-negative number")
    return v


def cmd_divergence(args) -> int:
    a = load_spd(args.a)
    b = load_spd(args.b)
    print(f"{divergence(args.metric, a, b):.12g}")
    return EXIT_OK


def cmd_describe(args) -> int:
    written = describe_tree(args.root, args.eps)
    log.info("wrote %d descriptors", len(written))
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        exp = Experiment(args.gallery_size, args.reps, args.seed, args.method)
    except ValueError as exc:
        print(f"rdc-reid run: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    dataset = load_dataset(args.root, args.eps)
    result = run_experiment(dataset, exp, workers=args.workers)
    with open(args.out, "w", newline="") as fh:
        fh.write(result.to_csv())
    log.info("rank-1 rate %.4f over %d repetitions", result.mean.rank1(), exp.repetitions)
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.classes < 2 or args.per_class < 3 or args.dim < 2:
        print("rdc-reid synth: error: need --classes >= 2, --per-class >= 3, --dim >= 2",
              file=sys.stderr)
        return EXIT_USAGE
    ds = generate_synthetic(args.classes, args.per_class, args.dim, args.spread, args.seed)
    save_dataset(ds, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rdc-reid", description="Stein-divergence person re-identification tools")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("divergence", help="divergence between two matrix files")
    d.add_argument("--metric", choices=METRICS, default="stein")
    d.add_argument("a")
    d.add_argument("b")
    d.set_defaults(func=cmd_divergence)

    s = sub.add_parser("describe", help="write a .cov descriptor for every image")
    s.add_argument("--root", required=True)
    s.add_argument("--eps", type=_nonneg_float, default=DEFAULT_EPS)
    s.set_defaults(func=cmd_describe)

    r = sub.add_parser("run", help="repeated gallery/probe experiment, CMC as CSV")
    r.add_argument("--root", required=True)
    r.add_argument("--method", choices=METHODS, default="rdc")
    r.add_argument("--gallery-size", type=_positive_int, required=True)
    r.add_argument("--reps", type=_positive_int, default=10)
    r.add_argument("--seed", type=_seed, default=0)
    r.add_argument("--out", required=True)
    r.add_argument("--eps", type=_nonneg_float, default=DEFAULT_EPS)
    r.add_argument("--workers", type=_positive_int, default=1)
    r.set_defaults(func=cmd_run)

    y = sub.add_parser("synth", help="write a synthetic dataset of .cov files")
    y.add_argument("--classes", type=int, required=True)
    y.add_argument("--per-class", type=int, required=True)
    y.add_argument("--dim", type=int, required=True)
    y.add_argument("--spread", type=_nonneg_float, required=True)
    y.add_argument("--seed", type=_seed, default=0)
    y.add_argument("--out", required=True)
    y.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
