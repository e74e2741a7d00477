"""Command-line front end: every engine as a subcommand with reproducible seeds.

Exit codes: 0 success, 1 engine resource limits (state space or enumeration
guards), 2 usage errors.  Reports go to stdout (or ``--out``) as JSON by
default; ``--format csv`` emits the flat tables documented in the README.
Diagnostics go to stderr only.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from typing import Sequence

from .deck_core import (
    Arrangement,
    Deck,
    InvalidDeckError,
    RngStream,
    parse_deck_spec,
    play,
    uniform_arrangement,
)
from .exact_engine import (
    BudgetExceededError,
    DeckTooLargeError,
    exact_pmf,
)
from .harness import (
    ExperimentReport,
    clt_experiment,
    conditional_clt_check,
    poisson_experiment,
    run_mc,
    variance_decomposition,
)
from .tie_stats import tie_counts, tie_runs

WORKERS_ENV = "CARDGUESS_WORKERS"


def _add_deck_flags(p: argparse.ArgumentParser) -> None:
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--deck", help='explicit multiplicities, e.g. "3,3,2"')
    group.add_argument("--balanced", help='balanced shorthand, e.g. "n=100,m=3"')


def _add_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", help="write the report here instead of stdout")


def _add_mc_flags(p: argparse.ArgumentParser, default_reps: int) -> None:
    p.add_argument("--reps", type=int, default=default_reps)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--workers",
        type=int,
        default=None,
        help=f"process count (default: ${WORKERS_ENV} or 1)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cardguess",
        description="Exact and Monte Carlo analysis of greedy card guessing "
        "with complete feedback.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", help="exact score distribution of a deck")
    _add_deck_flags(p)
    _add_output_flags(p)

    p = sub.add_parser("simulate", help="Monte Carlo score experiment")
    _add_deck_flags(p)
    _add_mc_flags(p, default_reps=10000)
    p.add_argument("--method", choices=("auto", "decomposed", "playout"), default="auto")
    _add_output_flags(p)

    p = sub.add_parser("decompose", help="tie statistics of arrangements")
    _add_deck_flags(p)
    p.add_argument("--arrangement", help='cards as "1,2,2,1,3,1,2,3"')
    p.add_argument(
        "--from-bottom",
        action="store_true",
        help="read --arrangement bottom-to-top instead of top-down",
    )
    p.add_argument("--reps", type=int, default=1, help="samples when no --arrangement")
    p.add_argument("--seed", type=int, default=0)
    _add_output_flags(p)

    p = sub.add_parser("poisson", help="collision counts vs. Poisson law")
    _add_deck_flags(p)
    p.add_argument("--j", type=int, required=True, help="collision order")
    p.add_argument("--t", type=int, required=True, help="bottom suffix length")
    _add_mc_flags(p, default_reps=10000)
    _add_output_flags(p)

    p = sub.add_parser("clt", help="normal-fit trend across deck sizes")
    p.add_argument("--m", type=int, required=True, help="copies per type")
    p.add_argument("--n-list", required=True, help='comma list, e.g. "50,500,5000"')
    _add_mc_flags(p, default_reps=10000)
    _add_output_flags(p)

    p = sub.add_parser("varcheck", help="total-variance decomposition")
    _add_deck_flags(p)
    _add_mc_flags(p, default_reps=10000)
    _add_output_flags(p)

    p = sub.add_parser("condclt", help="exact normal-fit gap for tie sizes")
    p.add_argument(
        "--tie-sizes",
        action="append",
        required=True,
        metavar="LIST",
        help='one vector per flag, e.g. --tie-sizes 4 --tie-sizes "2,2,2"',
    )
    p.add_argument("--seed", type=int, default=0)
    _add_output_flags(p)
    return parser


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    """Parse and validate; exits with status 2 on any usage problem."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "deck", None) is not None:
            args.deck_obj = parse_deck_spec(args.deck)
        elif getattr(args, "balanced", None) is not None:
            args.deck_obj = parse_deck_spec(args.balanced)
    except InvalidDeckError as exc:
        parser.error(str(exc))
    if getattr(args, "reps", 1) < 1:
        parser.error(f"--reps must be >= 1, got {args.reps}")
    if not 0 <= getattr(args, "seed", 0) < 2**64:
        parser.error(f"--seed must be a 64-bit unsigned integer, got {args.seed}")
    if getattr(args, "workers", None) is None:
        args.workers = int(os.environ.get(WORKERS_ENV, "1") or "1")
    if getattr(args, "workers", 1) < 1:
        parser.error(f"--workers must be >= 1, got {args.workers}")
    if args.command == "poisson":
        deck = args.deck_obj
        if not 1 <= args.j < deck.max_mult:
            parser.error(
                f"--j must satisfy 1 <= j < {deck.max_mult} for this deck, got {args.j}"
            )
        if not 0 <= args.t <= deck.total:
            parser.error(f"--t must be in [0, {deck.total}], got {args.t}")
    if args.command == "clt" and args.m < 1:
        parser.error(f"--m must be >= 1, got {args.m}")
    if args.command == "decompose" and args.arrangement is not None:
        try:
            cards = [int(v) for v in args.arrangement.split(",")]
            args.arrangement_obj = args.deck_obj.arrangement(
                cards, from_bottom=args.from_bottom
            )
        except (ValueError, InvalidDeckError) as exc:
            parser.error(f"bad --arrangement: {exc}")
    if args.command == "condclt":
        vectors = []
        for text in args.tie_sizes:
            try:
                vec = tuple(int(v) for v in text.split(","))
            except ValueError:
                parser.error(f"bad --tie-sizes {text!r}")
            if not vec or any(v < 1 for v in vec):
                parser.error(f"--tie-sizes entries must be >= 1, got {text!r}")
            vectors.append(vec)
        args.tie_size_vectors = vectors
    if args.command == "clt":
        try:
            args.n_values = [int(v) for v in args.n_list.split(",")]
        except ValueError:
            parser.error(f"bad --n-list {args.n_list!r}")
        if any(n < 1 for n in args.n_values):
            parser.error("--n-list entries must be >= 1")
    return args


def _report_dict(report: ExperimentReport) -> dict:
    return {
        "experiment": "simulate",
        "deck": report.deck,
        "n": report.n,
        "reps": report.reps,
        "seed": report.seed,
        "mean": report.mean,
        "var": report.var,
        "predicted": report.predicted,
        "ks_gap": report.ks_gap,
        "histogram": {str(k): v for k, v in sorted(report.histogram.items())},
        "extras": report.extras,
    }


def _decompose_entry(deck: Deck, arrangement: Arrangement) -> dict:
    tc = tie_counts(arrangement)
    runs = tie_runs(play(arrangement, "lowest"))
    return {
        "arrangement": list(arrangement.cards),
        "t": list(tc.thresholds[1:]),
        "w_tilde": list(tc.tie_sizes),
        "runs": [[j, s] for j, s in sorted(runs, reverse=True)],
    }


def _run_command(args: argparse.Namespace) -> dict:
    if args.command == "exact":
        pmf = exact_pmf(args.deck_obj)
        return {
            "experiment": "exact",
            "deck": args.deck_obj.spec(),
            "pmf": {str(k): p for k, p in pmf.as_dict().items()},
            "mean": pmf.mean(),
            "var": pmf.variance(),
        }
    if args.command == "simulate":
        report = run_mc(
            args.deck_obj, args.reps, args.seed, args.workers, method=args.method
        )
        return _report_dict(report)
    if args.command == "decompose":
        deck = args.deck_obj
        obj = {"experiment": "decompose", "deck": deck.spec()}
        if getattr(args, "arrangement_obj", None) is not None:
            obj.update(_decompose_entry(deck, args.arrangement_obj))
        else:
            root = RngStream(args.seed)
            obj["samples"] = [
                _decompose_entry(deck, uniform_arrangement(deck, root.substream(0, r)))
                for r in range(args.reps)
            ]
        return obj
    if args.command == "poisson":
        report = poisson_experiment(
            args.deck_obj, args.j, args.t, args.reps, args.seed, args.workers
        )
        return {
            "experiment": "poisson",
            "deck": report.deck,
            "j": report.j,
            "t": report.t,
            "reps": report.reps,
            "seed": report.seed,
            "lambda": report.lam,
            "tv": report.tv,
            "histogram": {str(k): v for k, v in sorted(report.histogram.items())},
        }
    if args.command == "clt":
        reports = clt_experiment(
            args.m, args.n_values, args.reps, args.seed, args.workers
        )
        return {
            "experiment": "clt",
            "m": args.m,
            "reps": args.reps,
            "seed": args.seed,
            "reports": [_report_dict(r) for r in reports],
        }
    if args.command == "varcheck":
        vd = variance_decomposition(args.deck_obj, args.reps, args.seed, args.workers)
        return {
            "experiment": "varcheck",
            "deck": vd.deck,
            "reps": vd.reps,
            "seed": vd.seed,
            "score_var": vd.score_var,
            "cond_mean_var": vd.cond_mean_var,
            "mean_cond_var": vd.mean_cond_var,
            "residual": vd.residual,
            "residual_ci99": list(vd.residual_ci99),
        }
    if args.command == "condclt":
        entries = conditional_clt_check(args.tie_size_vectors, args.seed)
        return {
            "experiment": "condclt",
            "entries": [
                {
                    "w_tilde": list(e.tie_sizes),
                    "mean": e.mean,
                    "variance": e.variance,
                    "gap": e.gap,
                    "degenerate": e.degenerate,
                }
                for e in entries
            ],
        }
    raise AssertionError(f"unhandled command {args.command}")  # pragma: no cover


def _flatten(prefix: str, value, rows: list[tuple[str, str]]) -> None:
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, rows)
    elif isinstance(value, list) and value and isinstance(value[0], (dict, list)):
        for i, v in enumerate(value):
            _flatten(f"{prefix}[{i}]", v, rows)
    elif isinstance(value, str):
        rows.append((prefix, value))
    else:
        rows.append((prefix, json.dumps(value)))


def to_csv(obj: dict) -> str:
    """Flat ``key,value`` table; clt reports get one row per (n, statistic)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if obj.get("experiment") == "clt":
        writer.writerow(["n", "statistic", "value"])
        for rep in obj["reports"]:
            n = rep["n"]
            rows: list[tuple[str, str]] = []
            for key in ("mean", "var", "predicted", "ks_gap", "histogram", "extras"):
                _flatten(key, rep[key], rows)
            for key, value in rows:
                writer.writerow([n, key, value])
        return buf.getvalue()
    writer.writerow(["key", "value"])
    rows = []
    _flatten("", obj, rows)
    for key, value in rows:
        writer.writerow([key, value])
    return buf.getvalue()


def dispatch(args: argparse.Namespace) -> int:
    """Run the selected engine and write the report; returns the exit code."""
    try:
        obj = _run_command(args)
    except (BudgetExceededError, DeckTooLargeError) as exc:
        print(f"cardguess {args.command}: {exc}", file=sys.stderr)
        return 1
    if args.format == "csv":
        text = to_csv(obj)
    else:
        text = json.dumps(obj, indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    return dispatch(parse_args(argv))


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
