"""Command-line front end: generate, optimize, evaluate, rank."""

from __future__ import annotations

import argparse
import logging
import secrets
import sys
import time
import warnings
from typing import Sequence

from odgolf.errors import GraphError, ValidationError
from odgolf.graph_core import (
    Graph,
    GraphMetrics,
    graph_metrics,
    lower_bounds,
    parse_edge_list,
    serialize_edge_list,
)
from odgolf.greedy import GrowConfig, grow
from odgolf.importance import rank_edges
from odgolf.seed_builder import MATCHINGS, create_base_graph
from odgolf.two_opt import SearchConfig, multiple_2opt, parse_acceptance

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_IO = 4

DEFAULT_SEED = 20151120
DEFAULT_EPSILON_WINDOW = 2000

log = logging.getLogger("odgolf")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _seed(text: str) -> int:
    if text == "random":
        return secrets.randbits(32)
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer or 'random', got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _non_negative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


def _acceptance(text: str) -> tuple[str, float]:
    try:
        return parse_acceptance(text)
    except ValidationError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def report_lines(
    mt: GraphMetrics, params: Sequence[tuple[str, object]] = (), elapsed: float | None = None
) -> list[str]:
    """`key value` lines; the graph part depends only on the graph itself."""
    rows: list[tuple[str, object]] = [
        ("order", mt.n),
        ("degree_min", mt.degree_min),
        ("degree_max", mt.degree_max),
        ("connected", int(mt.connected)),
        ("diameter", mt.diameter),
        ("aspl", f"{float(mt.aspl_exact):.9f}"),
        ("distance_sum", mt.distance_sum),
    ]
    if mt.degree_max >= 2 and mt.n >= 2:
        d_lb, aspl_lb = lower_bounds(mt.n, mt.degree_max)
        rows += [
            ("diameter_lb", d_lb),
            ("aspl_lb", f"{float(aspl_lb):.9f}"),
            ("aspl_gap", f"{float(mt.aspl_exact - aspl_lb):.9f}"),
        ]
    rows += list(params)
    if elapsed is not None:
        rows.append(("elapsed_seconds", f"{elapsed:.3f}"))
    return [f"{k} {_fmt(v)}" for k, v in rows]


def _read_graph(path: str) -> Graph:
    if path == "-":
        return parse_edge_list(sys.stdin)
    with open(path) as fh:
        return parse_edge_list(fh)


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _emit_report(args, lines: list[str]) -> None:
    text = "\n".join(lines) + "\n"
    if getattr(args, "report", None):
        _write(args.report, text)
    if getattr(args, "output", None) != "-":
        sys.stdout.write(text)


def _check_workers(args) -> None:
    if args.workers > 1:
        log.info("only sequential search is implemented; running with 1 worker")


def cmd_generate(args) -> int:
    n, d = args.order, args.degree
    if n < 20:
        raise ValidationError(f"order must be >= 20, got {n}")
    if d < 5:
        raise ValidationError(f"degree must be >= 5, got {d}")
    if d >= n:
        raise ValidationError(f"degree must be < order, got d={d} n={n}")
    _check_workers(args)
    started = time.monotonic()
    cfg = GrowConfig(tie_break=args.tie_break, seed=args.seed, recompute_every=args.recompute_every)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = grow(create_base_graph(n, args.matching), d, cfg)
    for w in caught:
        log.warning("%s", w.message)
    elapsed = time.monotonic() - started
    _write(args.output, serialize_edge_list(result.graph))
    params = [
        ("seed", args.seed),
        ("degree", d),
        ("matching", args.matching),
        ("tie_break", args.tie_break),
        ("recompute_every", args.recompute_every),
        ("workers", args.workers),
        ("edges_added", len(result.added) + len(result.filled)),
        ("deficient_nodes", len(result.deficient)),
    ]
    _emit_report(args, report_lines(graph_metrics(result.graph), params, elapsed))
    return EXIT_OK


def cmd_optimize(args) -> int:
    g = _read_graph(args.input)
    _check_workers(args)
    mode, eps = args.acceptance
    window = args.worse_window
    if window is None and mode == "threshold":
        window = DEFAULT_EPSILON_WINDOW
    cfg = SearchConfig(
        ordering=args.ordering.replace("-", "_"),
        acceptance=mode,
        epsilon=eps,
        timeout=args.timeout_secs,
        rerank_cadence=args.rerank_cadence,
        seed=args.seed,
        worse_window=window,
        restart_after=args.restart_after,
        max_evaluations=args.max_evals,
        restart_on_improve=args.restart_on_improve,
    )
    before = graph_metrics(g)
    if not before.connected:
        raise ValidationError("input graph is disconnected")
    started = time.monotonic()
    best, history = multiple_2opt(g, cfg)
    elapsed = time.monotonic() - started
    _write(args.output, serialize_edge_list(best))
    if args.history:
        history.write_csv(args.history)
    params = [
        ("seed", args.seed),
        ("ordering", args.ordering),
        ("acceptance", "strict" if mode == "strict" else f"threshold={eps:g}"),
        ("timeout_secs", f"{args.timeout_secs:g}"),
        ("rerank_cadence", args.rerank_cadence),
        ("worse_window", window if window is not None else "none"),
        ("restart_after", args.restart_after),
        ("restart_on_improve", int(args.restart_on_improve)),
        ("max_evals", args.max_evals if args.max_evals is not None else "none"),
        ("workers", args.workers),
        ("aspl_input", f"{float(before.aspl_exact):.9f}"),
        ("swaps", len(history)),
        ("evaluations", history.evaluations),
        ("best_step", history.best_step),
        ("restores", len(history.restores)),
    ]
    _emit_report(args, report_lines(graph_metrics(best), params, elapsed))
    return EXIT_OK


def cmd_evaluate(args) -> int:
    g = _read_graph(args.input)
    mt = graph_metrics(g)
    sys.stdout.write("\n".join(report_lines(mt)) + "\n")
    return EXIT_OK


def cmd_rank(args) -> int:
    g = _read_graph(args.input)
    rank = rank_edges(g)
    out = [f"{u} {v} {imp:.6f} {r}" for r, ((u, v), imp) in enumerate(rank)]
    sys.stdout.write("".join(line + "\n" for line in out))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="odgolf", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--seed", type=_seed, default=DEFAULT_SEED,
                       help="integer seed or 'random' (default: %(default)s)")
        p.add_argument("--workers", type=_positive, default=1)
        p.add_argument("--report", metavar="PATH", help="also write the report here")

    p = sub.add_parser("generate", help="build a base graph and grow it to degree d")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--matching", choices=sorted(MATCHINGS), default="offset5")
    p.add_argument("--tie-break", choices=("seeded", "lowest-id"), default="seeded")
    p.add_argument("--recompute-every", type=_non_negative, default=64)
    p.add_argument("--output", required=True, metavar="PATH", help="edge list ('-' for stdout)")
    common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("optimize", help="2-opt search starting from an edge list")
    p.add_argument("input", help="edge list ('-' for stdin)")
    p.add_argument("--timeout-secs", type=float, default=60.0)
    p.add_argument("--ordering", choices=("smallest-first", "triangle"), default="smallest-first")
    p.add_argument("--acceptance", type=_acceptance, default=("strict", 0.0),
                   help="'strict' or 'threshold=EPS'")
    p.add_argument("--rerank-cadence", type=_positive, default=50)
    p.add_argument("--worse-window", type=_non_negative, default=None,
                   help=f"evaluations without acceptance before a worse move "
                        f"(threshold mode, default {DEFAULT_EPSILON_WINDOW})")
    p.add_argument("--restart-after", type=_positive, default=3)
    p.add_argument("--restart-on-improve", action="store_true",
                   help="rescan from the lowest-ranked pair after each improving swap")
    p.add_argument("--max-evals", type=_positive, default=None)
    p.add_argument("--output", required=True, metavar="PATH", help="edge list ('-' for stdout)")
    p.add_argument("--history", metavar="PATH", help="swap history CSV")
    common(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("evaluate", help="report diameter, ASPL and lower bounds")
    p.add_argument("input", help="edge list ('-' for stdin)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("rank", help="list edges by ascending importance")
    p.add_argument("input", help="edge list ('-' for stdin)")
    p.set_defaults(func=cmd_rank)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose > 1 else logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except GraphError as e:
        print(f"odgolf: error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as e:
        print(f"odgolf: I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
