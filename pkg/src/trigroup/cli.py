"""Command-line entry point: ``trigroup <subcommand> [flags]``.

Exit codes: 0 success, 2 usage error, 3 budget exhausted (where fatal),
1 for I/O errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from trigroup import __version__
from trigroup.davkd.arithmetic import DEFAULT_A, threshold_arithmetic
from trigroup.davkd.diagram import (
    BudgetExceeded,
    Diagram,
    analysis_row,
    enumerate_davkd,
    fulfillability_upper_bound,
    is_fulfillable,
    is_reduced,
    orbit,
)
from trigroup.decide import Budget, decide
from trigroup.io import csv_text, dumps, jsonl_text, make_manifest, stable, write_output
from trigroup.lab import NoBracket, find_threshold, p_of_c, parse_grid, sweep
from trigroup.presentation import (
    Presentation,
    PresentationError,
    SampleConfig,
    parse_letter,
    parse_presentation,
    sample_presentation,
)
from trigroup.proofstats import (
    BoostConfig,
    boost_experiment,
    gprime_path_stats,
    letter_closure,
    z_graph_stats,
    z_graph_trials,
)

CURVE_COLUMNS = ("c", "p", "lower", "upper", "undecided", "ci_lo", "ci_hi")


class UsageError(Exception):
    pass


def _on_off(value: str) -> bool:
    if value not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return value == "on"


def _seed(value: str) -> int:
    s = int(value)
    if not 0 <= s < 2**64:
        raise argparse.ArgumentTypeError("seed must be in [0, 2^64)")
    return s


def _positive_int(value: str) -> int:
    k = int(value)
    if k < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return k


def _letters(value: str) -> list[int]:
    try:
        return [parse_letter(t) for t in value.replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=0, help="master seed (default 0)")
    common.add_argument("--threads", type=_positive_int, default=1, help="worker processes; output does not depend on it")
    common.add_argument("--output", help="output file (default stdout)")

    parser = argparse.ArgumentParser(prog="trigroup", description="Random triangular groups: sampling, decisions, diagrams and threshold experiments.")
    parser.add_argument("--version", action="version", version=f"trigroup {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command", required=True)

    def engine(p):
        p.add_argument("--max-cosets", type=int, default=1000, help="coset table budget, 0 disables enumeration (default 1000)")
        p.add_argument("--cascade", type=_on_off, default=True, metavar="on|off", help="run the deduction cascade (default on)")

    def c_or_p(p):
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--p", type=float, help="relator probability")
        g.add_argument("--c", type=float, help="use p = c * n^-1.5")

    p = sub.add_parser("sample", parents=[common], help="sample a presentation from Gamma(n, p)")
    p.add_argument("--n", type=_positive_int, required=True, help="number of generators")
    c_or_p(p)

    p = sub.add_parser("decide", parents=[common], help="decide triviality of a presentation")
    p.add_argument("--input", required=True, help="presentation file (text or JSON)")
    engine(p)

    p = sub.add_parser("sweep", parents=[common], help="coupled h(n, p) curve over a c grid (CSV)")
    p.add_argument("--n", type=_positive_int, required=True, help="number of generators")
    p.add_argument("--c", required=True, help="grid lo:hi:step or comma list, p = c * n^-1.5")
    p.add_argument("--trials", type=_positive_int, default=200, help="trials per grid point (default 200)")
    p.add_argument("--log", help="also write per-trial JSONL here")
    engine(p)

    p = sub.add_parser("threshold", parents=[common], help="bisect for the c where half the trials are certified trivial")
    p.add_argument("--n", type=_positive_int, required=True, help="number of generators")
    p.add_argument("--c", default="0.005:0.2:0.001", help="search range and tolerance lo:hi:tol (default 0.005:0.2:0.001)")
    p.add_argument("--trials", type=_positive_int, default=200, help="trials per evaluation (default 200)")
    engine(p)

    p = sub.add_parser("boost", parents=[common], help="paired boost experiment (JSONL)")
    p.add_argument("--n", type=_positive_int, required=True, help="number of generators")
    c_or_p(p)
    p.add_argument("--eps", type=float, default=0.5, help="extra relators drawn at probability eps*p (default 0.5)")
    p.add_argument("--trials", type=_positive_int, default=200, help="paired trials (default 200)")
    p.add_argument("--input", help="presentation holding R_fixed (default the single relator g1 g2 g3)")
    p.add_argument("--max-cosets", type=int, default=0, help="coset table budget (default 0: cascade and abelianization only)")
    p.add_argument("--cascade", type=_on_off, default=True, metavar="on|off", help="run the deduction cascade (default on)")

    p = sub.add_parser("davkd-enum", parents=[common], help="enumerate decorated diagrams with analysis rows (JSONL)")
    p.add_argument("--m", type=_positive_int, required=True, help="number of faces")
    p.add_argument("--mode", choices=("raw", "canonical"), default="canonical", help="raw or canonical (default canonical)")
    p.add_argument("--f", type=Fraction, default=Fraction(1, 2), help="density parameter f, rational allowed (default 1/2)")
    p.add_argument("--with-diagrams", action="store_true", help="include each diagram in its row")

    p = sub.add_parser("davkd-check", parents=[common], help="analyze one diagram (JSON)")
    p.add_argument("--input", required=True, help="diagram JSON file")
    p.add_argument("--f", type=Fraction, default=Fraction(1, 2), help="density parameter f (default 1/2)")
    p.add_argument("--n", type=_positive_int, help="generators, for the fulfillability bound")
    p.add_argument("--p", type=float, help="relator probability, for the fulfillability bound")
    p.add_argument("--presentation", help="presentation file to test fulfillability against")
    p.add_argument("--max-faces", type=_positive_int, default=12, help="fulfillability search cap (default 12)")

    p = sub.add_parser("zgraph", parents=[common], help="Z-graph statistics (JSONL)")
    p.add_argument("--z", type=_letters, required=True, help="letters of Z, e.g. 'g1,g2'; inverses are added")
    p.add_argument("--input", help="presentation file (otherwise sample with --n and --p)")
    p.add_argument("--n", type=_positive_int, help="number of generators when sampling")
    p.add_argument("--p", type=float, help="relator probability when sampling (default n^-1.5)")
    p.add_argument("--trials", type=_positive_int, default=1, help="sampled presentations (default 1)")

    p = sub.add_parser("paths", parents=[common], help="G' path counts X and Y (JSON)")
    p.add_argument("--n", type=_positive_int, required=True, help="number of generators")
    p.add_argument("--pairs", type=int, required=True, help="size of the planted pair set M")
    p.add_argument("--eps", type=float, required=True, help="boost factor")
    p.add_argument("--p", type=float, required=True, help="base probability; relators appear with eps*p")
    p.add_argument("--trials", type=_positive_int, default=1000, help="samples (default 1000)")

    p = sub.add_parser("arithmetic", parents=[common], help="f(n), p(n), window and tail bound (JSON)")
    p.add_argument("--n", type=float, required=True, help="n >= 16 (floats such as 1e6 allowed)")
    p.add_argument("--a", type=float, default=DEFAULT_A, help=f"diagram count base a (default {DEFAULT_A:g})")
    p.add_argument("--b", type=float, help="tail constant b (default 6*a*240*200^2)")
    return parser


def _budget(args) -> Budget:
    return Budget(cascade=args.cascade, max_cosets=args.max_cosets)


def _read(path: str) -> str:
    return Path(path).read_text()


def _p(args) -> float:
    p = args.p if args.p is not None else p_of_c(args.c, args.n)
    if not 0 <= p <= 1:
        raise UsageError(f"p = {p} is outside [0, 1]")
    return p


def cmd_sample(args, man, out):
    P = sample_presentation(SampleConfig(args.n, _p(args), args.seed))
    text = P.to_text() + "# manifest: " + dumps(stable(man)) + "\n"
    write_output(text, args.output, man, out)


def cmd_decide(args, man, out):
    P = parse_presentation(_read(args.input))
    v = decide(P, _budget(args))
    if args.output:
        write_output(jsonl_text(man, [v.to_dict()]), args.output, man, out)
    out.write(v.outcome + "\n")


def cmd_sweep(args, man, out):
    curve = sweep(args.n, parse_grid(args.c), args.trials, _budget(args), args.seed, args.threads)
    write_output(csv_text(man, CURVE_COLUMNS, curve.csv_rows()), args.output, man, out)
    if args.log:
        write_output(jsonl_text(man, curve.records), args.log, man, out)


def cmd_threshold(args, man, out):
    lo, hi, tol = (float(x) for x in args.c.split(":"))
    res = find_threshold(args.n, args.trials, tol, args.seed, lo, hi, _budget(args), args.threads)
    write_output(jsonl_text(man, [res.to_dict()]), args.output, man, out)


def cmd_boost(args, man, out):
    fixed = parse_presentation(_read(args.input)).relators if args.input else ((0, 2, 4),)
    cfg = BoostConfig(args.n, _p(args), args.eps, tuple(fixed), args.trials, args.seed, _budget(args))
    rep = boost_experiment(cfg, args.threads)
    write_output(jsonl_text(man, rep.records + [{"summary": rep.to_dict()}]), args.output, man, out)


def cmd_davkd_enum(args, man, out):
    rows = []
    for D in enumerate_davkd(args.m, args.mode):
        row = analysis_row(D, args.f) | {"reduced": is_reduced(D)}
        if args.mode == "canonical":
            row["orbit_size"] = len(orbit(D))
        if args.with_diagrams:
            row["diagram"] = D.to_dict()
        rows.append(row)
    write_output(jsonl_text(man, rows), args.output, man, out)


def cmd_davkd_check(args, man, out):
    D = Diagram.from_json(_read(args.input))
    row = analysis_row(D, args.f) | {"reduced": is_reduced(D)}
    if (args.n is None) != (args.p is None):
        raise UsageError("--n and --p go together")
    if args.n is not None:
        row["fulfillability_bound"] = fulfillability_upper_bound(D, args.n, args.p)
    if args.presentation:
        ok, witness = is_fulfillable(D, parse_presentation(_read(args.presentation)), args.max_faces)
        row["fulfillable"] = ok
        row["witness"] = {str(k): list(v) for k, v in witness.items()} if ok else None
    write_output(jsonl_text(man, [row]), args.output, man, out)


def cmd_zgraph(args, man, out):
    Z = letter_closure(args.z)
    if args.input:
        P = parse_presentation(_read(args.input))
        rows = [z_graph_stats(P, Z, args.p).to_dict()]
    else:
        if args.n is None:
            raise UsageError("give --input or --n")
        p = args.p if args.p is not None else args.n**-1.5
        rows = z_graph_trials(args.n, p, Z, args.trials, args.seed, args.threads)
    write_output(jsonl_text(man, rows), args.output, man, out)


def cmd_paths(args, man, out):
    stats = gprime_path_stats(args.n, args.pairs, args.eps, args.p, args.trials, args.seed, threads=args.threads)
    write_output(jsonl_text(man, [stats.to_dict()]), args.output, man, out)


def cmd_arithmetic(args, man, out):
    res = threshold_arithmetic(args.n, args.a, args.b)
    write_output(jsonl_text(man, [res.to_dict()]), args.output, man, out)


COMMANDS = {
    "sample": cmd_sample,
    "decide": cmd_decide,
    "sweep": cmd_sweep,
    "threshold": cmd_threshold,
    "boost": cmd_boost,
    "davkd-enum": cmd_davkd_enum,
    "davkd-check": cmd_davkd_check,
    "zgraph": cmd_zgraph,
    "paths": cmd_paths,
    "arithmetic": cmd_arithmetic,
}


def _config(args) -> dict:
    skip = {"command", "seed", "threads", "output"}
    return {k: (str(v) if isinstance(v, Fraction) else v) for k, v in sorted(vars(args).items()) if k not in skip}


def main(argv=None, stdout=None, stderr=None) -> int:
    out = stdout or sys.stdout
    err = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    inputs = [x for x in (getattr(args, "input", None), getattr(args, "presentation", None)) if x]
    outputs = [x for x in (args.output, getattr(args, "log", None)) if x]
    man = make_manifest(args.command, _config(args), args.seed, args.threads, inputs, outputs)
    try:
        COMMANDS[args.command](args, man, out)
    except (BudgetExceeded, NoBracket) as exc:
        err.write(f"trigroup {args.command}: {exc}\n")
        return 3
    except OSError as exc:
        err.write(f"trigroup {args.command}: {exc}\n")
        return 1
    except (UsageError, PresentationError, ValueError, json.JSONDecodeError, KeyError) as exc:
        err.write(f"trigroup {args.command}: error: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
