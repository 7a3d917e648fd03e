"""Command-line interface.

Exit codes: 0 success, 2 bad flags, 3 data errors, 4 internal failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys

import numpy as np

from .dataset import DEFAULT_DECISION_COLUMN, load_madelon, load_matrix_csv
from .discretization import DiscretizationParams, discretize_all
from .engine import EngineParams, compute_interesting_tuples, compute_max_info_gains
from .io import atomic_write, dumps_csv, dumps_json, load_result
from .pipeline import MdfsParams, relevant_variables, run_mdfs, t_test_all
from .plot import ranking_svg
from .stats import ADJUST_METHODS, degrees_of_freedom, ig_limit, trimmed_fit
from .validation import MAX_DIMENSIONS, MAX_DIVISIONS, DataError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 2, 3, 4

log = logging.getLogger("mdfs")


def _bounded_int(name, lo, hi=None):
    def parse(s):
        try:
            v = int(s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer, got {s!r}") from None
        if v < lo or (hi is not None and v > hi):
            rng = f"{lo}..{hi}" if hi is not None else f">= {lo}"
            raise argparse.ArgumentTypeError(f"{name} must be {rng}")
        return v

    return parse


def _unit_interval(name, closed=True):
    def parse(s):
        try:
            v = float(s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number, got {s!r}") from None
        ok = 0.0 <= v <= 1.0 if closed else 0.0 < v < 1.0
        if not ok:
            raise argparse.ArgumentTypeError(
                f"{name} must lie in {'[0, 1]' if closed else '(0, 1)'}"
            )
        return v

    return parse


def _add_input(p):
    g = p.add_argument_group("input")
    g.add_argument("--data", help="CSV file with a header row")
    g.add_argument("--decision-column", default=DEFAULT_DECISION_COLUMN,
                   help="decision column name or zero-based position (default: %(default)s)")
    g.add_argument("--delimiter", default=",")
    g.add_argument("--madelon-data", help="whitespace-separated integer matrix")
    g.add_argument("--madelon-labels", help="one label in {-1,1} per line")


def _add_search(p, tuples=False):
    lo = 2 if tuples else 1
    p.add_argument("--dimensions", type=_bounded_int("dimensions", lo, MAX_DIMENSIONS), default=lo)
    p.add_argument("--divisions", type=_bounded_int("divisions", 1, MAX_DIVISIONS), default=1)
    p.add_argument("--discretizations", type=_bounded_int("discretizations", 1), default=1)
    p.add_argument("--range", type=_unit_interval("range"), default=None,
                   help="share randomness in [0,1] (default: 0 for one discretization, else 0.5)")
    p.add_argument("--pseudocount", type=_unit_interval("pseudocount"), default=0.25)
    p.add_argument("--seed", type=_bounded_int("seed", 0, 2**64 - 1), default=None)
    p.add_argument("--workers", type=_bounded_int("workers", 1), default=1)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mdfs", description="Multidimensional information-gain feature selection."
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="full relevance analysis")
    _add_input(run)
    _add_search(run)
    run.add_argument("--contrast", type=_bounded_int("contrast", 0), default=30)
    run.add_argument("--adjust", choices=ADJUST_METHODS, default="holm")
    run.add_argument("--level", type=_unit_interval("level", closed=False), default=0.05)
    run.add_argument("--track-tuples", action="store_true")
    run.add_argument("-o", "--output")
    run.add_argument("--format", choices=("json", "csv"), default="json")
    run.add_argument("--no-timing", action="store_true",
                     help="omit wall-clock timing so output is byte-reproducible")

    tup = sub.add_parser("tuples", help="list (variable, tuple) pairs above an IG threshold")
    _add_input(tup)
    _add_search(tup, tuples=True)
    thr = tup.add_mutually_exclusive_group(required=True)
    thr.add_argument("--threshold", type=float)
    thr.add_argument("--alpha", type=_unit_interval("alpha", closed=False))
    tup.add_argument("-o", "--output")

    tt = sub.add_parser("ttest", help="per-variable Welch t-test reference")
    _add_input(tt)
    tt.add_argument("--adjust", choices=ADJUST_METHODS, default="holm")
    tt.add_argument("--level", type=_unit_interval("level", closed=False), default=0.05)
    tt.add_argument("-o", "--output")

    pl = sub.add_parser("plot", help="SVG ranking plot of a result file")
    pl.add_argument("result")
    pl.add_argument("-o", "--output", required=True)
    return parser


def _load(args, parser):
    csv_in = args.data is not None
    mad = args.madelon_data is not None or args.madelon_labels is not None
    if csv_in == mad:
        parser.error("give exactly one of --data or --madelon-data/--madelon-labels")
    if mad:
        if args.madelon_data is None or args.madelon_labels is None:
            parser.error("--madelon-data and --madelon-labels go together")
        return load_madelon(args.madelon_data, args.madelon_labels)
    return load_matrix_csv(args.data, args.decision_column, args.delimiter)


def _emit(text, path):
    if path:
        atomic_write(path, text)
    else:
        sys.stdout.write(text)


def cmd_run(args, parser):
    ds = _load(args, parser)
    params = MdfsParams(
        dimensions=args.dimensions, divisions=args.divisions,
        discretizations=args.discretizations, range=args.range,
        pseudocount_xi=args.pseudocount, n_contrast=args.contrast, seed=args.seed,
        adjust_method=args.adjust, level=args.level, track_tuples=args.track_tuples,
    )
    result = run_mdfs(ds, params, workers=args.workers)
    text = dumps_json(result, timing=not args.no_timing) if args.format == "json" else dumps_csv(result)
    _emit(text, args.output)
    _, ordered = relevant_variables(result)
    out = sys.stdout if args.output else sys.stderr
    print(
        f"{ordered.size} relevant of {ds.n_variables} variables "
        f"(k={params.dimensions}, {params.adjust_method} < {params.level}; "
        f"fit {result.fit.mode}, df={result.fit.df:g}, m_hat={result.fit.m_hat:.4g}; "
        f"seed {result.seed}; {result.wall_time:.2f} s)",
        file=out,
    )
    if ordered.size:
        print("by p-value: " + " ".join(ds.variable_names[i] for i in ordered), file=out)
    return EXIT_OK


def cmd_tuples(args, parser):
    ds = _load(args, parser)
    seed = 0 if args.seed is None else args.seed
    disc = DiscretizationParams(args.divisions, args.discretizations, args.range, seed)
    view = discretize_all(ds, disc)
    params = EngineParams(args.dimensions, args.pseudocount, disc)
    if args.alpha is not None:
        mig = compute_max_info_gains(view, ds.decision, params, workers=args.workers)
        fit = trimmed_fit(mig.ig, degrees_of_freedom(args.dimensions, disc.levels))
        threshold = ig_limit(fit, args.alpha)
    else:
        threshold = args.threshold
    records = compute_interesting_tuples(view, ds.decision, params, threshold, workers=args.workers)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["variable", "name"] + [f"member{j + 1}" for j in range(args.dimensions)] + ["ig"])
    for r in records:
        w.writerow([r.variable, ds.variable_names[r.variable], *r.tuple, repr(r.ig)])
    _emit(buf.getvalue(), args.output)
    vars_hit = sorted({r.variable for r in records})
    print(f"{len(records)} records at IG >= {threshold:.6g}, covering {len(vars_hit)} variables",
          file=sys.stderr)
    return EXIT_OK


def cmd_ttest(args, parser):
    ds = _load(args, parser)
    p, adj, failed = t_test_all(ds, args.adjust)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["variable", "name", "p_value", "adjusted_p_value", "error"])
    for i, name in enumerate(ds.variable_names):
        if failed[i]:
            w.writerow([i, name, "", "", "degenerate groups"])
        else:
            w.writerow([i, name, repr(float(p[i])), repr(float(adj[i])), ""])
    _emit(buf.getvalue(), args.output)
    sig = np.flatnonzero(~failed & (np.nan_to_num(adj, nan=1.0) < args.level))
    sig = sig[np.lexsort((sig, adj[sig]))]
    out = sys.stdout if args.output else sys.stderr
    print(f"{sig.size} significant ({args.adjust} < {args.level}): "
          + " ".join(ds.variable_names[i] for i in sig), file=out)
    if failed.any():
        print(f"{int(failed.sum())} variable(s) skipped: zero variance in both groups", file=out)
    return EXIT_OK


def cmd_plot(args, parser):
    try:
        result = load_result(args.result)
    except OSError as e:
        raise DataError(f"cannot read {args.result}: {e}") from None
    except (ValueError, KeyError, TypeError) as e:
        raise DataError(f"malformed result file {args.result}: {e}") from None
    lim = ig_limit(result.fit, result.params.level)
    title = f"k={result.params.dimensions}, {result.relevant_variables.size} relevant"
    atomic_write(args.output, ranking_svg(result.statistic, result.relevant_variables, lim, title))
    return EXIT_OK


COMMANDS = {"run": cmd_run, "tuples": cmd_tuples, "ttest": cmd_ttest, "plot": cmd_plot}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args, parser)
    except DataError as e:
        print(f"mdfs: error: {e}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, json.JSONDecodeError) as e:
        print(f"mdfs: error: {e}", file=sys.stderr)
        return EXIT_DATA
    except Exception as e:  # noqa: BLE001
        log.debug("internal failure", exc_info=True)
        print(f"mdfs: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
