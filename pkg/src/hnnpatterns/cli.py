"""``hnnpatterns`` command line.

Every experiment subcommand builds a certificate, writes it (json), a
plot-ready csv or a text table, and exits 0 iff the experiment passed.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path
from typing import Optional

from . import __version__
from .analysis import (
    MAX_WITNESS_N,
    almost_convex_audit,
    canonical_json,
    certificate,
    fellow_traveler_audit,
    fftp_base_check,
    fftp_constant,
    nonregularity_cutpoints,
)
from .cayley import DistanceMap, build_ball, distance
from .errors import MalformedWordError, PreconditionError, ResourceError
from .patterns import enumerate_reachable, matches_conjectured_form, parse_sequence
from .planes import TreeOracle
from .presentation import load_presentation, normalize, parse_word
from .strips import survey

FINITE_SHADOW = "finite shadow: checked for the listed n only"


def _presentation(text: str):
    try:
        return load_presentation(text)
    except (KeyError, ValueError) as e:
        raise argparse.ArgumentTypeError(f"unknown presentation {text!r}: {e}")


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _emit(args, cert: dict, rows: list[list], header: list[str]) -> int:
    if args.format == "json":
        text = canonical_json(cert) + "\n"
    elif args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        text = buf.getvalue()
    else:
        widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)] if rows else [len(h) for h in header]
        lines = ["  ".join(str(x).rjust(n) for x, n in zip(r, widths)) for r in [header] + rows]
        lines.append(f"{cert['experiment']}: {'PASS' if cert['passed'] else 'FAIL'}")
        text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if cert["passed"] else 1


def _ball(p, radius: int, cache: Optional[str]) -> DistanceMap:
    if cache and Path(cache).exists():
        m = DistanceMap.load(cache, p)
        if m.radius >= radius:
            return m
    return build_ball(p, radius)


# ---------------------------------------------------------------------------
# subcommands


def cmd_ball(args) -> int:
    p = args.presentation
    m = _ball(p, args.radius, None)
    cache = args.cache or f"{p.name}_ball_{args.radius}.npz"
    m.save(cache)
    sizes = m.sphere_sizes()
    cert = certificate("ball", p, {"radius": args.radius}, {"sphere_sizes": sizes}, True,
                       radius=args.radius)
    return _emit(args, cert, [[i, s] for i, s in enumerate(sizes)], ["radius", "sphere_size"])


def cmd_sequences(args) -> int:
    p = args.presentation
    s = survey(p, args.radius, keep_sequences=True)
    results = {
        "crossings": s.crossings,
        "states": s.states,
        "initial": s.initial,
        "initial_patterns": s.initial_patterns,
        "initial_zero_runs": s.initial_zero_runs,
        "violations": s.violations,
        "move_checks": s.move_checks,
        "move_mismatches": s.move_mismatches,
        "examples": s.examples,
        "sequences": s.sequences,
    }
    cert = certificate("sequences", p, {"radius": args.radius}, results, s.passed, radius=args.radius)
    rows = [[seq, n, matches_conjectured_form(parse_sequence(seq))] for seq, n in s.sequences.items()]
    return _emit(args, cert, rows, ["sequence", "strips", "conjectured_form"])


def cmd_moves(args) -> int:
    r = enumerate_reachable(args.depth, mode=args.mode)
    items = sorted(r.items.items(), key=lambda kv: (len(kv[1]), str(kv[0])))
    top = set(r.maximal())
    rows = [[str(obj), " ".join(str(m) for m in word) or "-", obj in top, matches_conjectured_form(obj)]
            for obj, word in items]
    ok = all(row[3] for row in rows)
    cert = certificate(
        "moves", "g11", {"depth": args.depth, "mode": args.mode},
        {"count": len(rows), "maximal": sorted(str(x) for x in top), "items": [row[:2] for row in rows]}, ok,
    )
    return _emit(args, cert, rows, [args.mode, "moves", "maximal", "conjectured_form"])


def cmd_nonreg(args) -> int:
    reps = nonregularity_cutpoints(args.n_max, args.presentation, direction=args.direction)
    ok = all(r.agrees for r in reps)
    cert = certificate("nonreg", args.presentation, {"n_max": args.n_max, "direction": args.direction},
                       reps, ok, note=FINITE_SHADOW)
    rows = [[r.n, r.max_geodesic_k, r.expected, r.agrees] for r in reps]
    return _emit(args, cert, rows, ["n", "max_k", "expected", "agrees"])


def cmd_fellow(args) -> int:
    oracle = TreeOracle(args.presentation)
    reps = [fellow_traveler_audit(n, args.presentation, oracle) for n in range(1, args.n + 1)]
    ok = all(r.both_unique and r.endpoint_distance <= 1 for r in reps)
    ok = ok and all(b.sync_constant > a.sync_constant for a, b in zip(reps, reps[1:]))
    cert = certificate("fellow", args.presentation, {"n": args.n}, reps, ok, note=FINITE_SHADOW)
    rows = [[r.n, r.geodesic_counts[0], r.geodesic_counts[1], r.endpoint_distance, r.sync_constant]
            for r in reps]
    return _emit(args, cert, rows, ["n", "count_w", "count_w_prime", "endpoint_distance", "sync_constant"])


def cmd_ac(args) -> int:
    p = args.presentation
    k = args.k if args.k is not None else fftp_constant(p)
    ball = _ball(p, args.radius, args.cache)
    reps = [almost_convex_audit(p, n, C_cap=args.cap, k=k, ball=ball)
            for n in range(args.start, args.radius + 1)]
    ok = all(r.passed for r in reps)
    cert = certificate("ac", p, {"radius": args.radius, "start": args.start, "k": k, "cap": args.cap},
                       reps, ok, radius=args.radius)
    rows = [[r.N, r.min_connecting_length, r.C_cap, r.pairs_at_distance_2_outside] for r in reps]
    return _emit(args, cert, rows, ["N", "worst_length", "cap", "hard_pairs"])


def cmd_fftp(args) -> int:
    p = args.presentation
    r = fftp_base_check(p, args.k, args.length, samples=args.samples, seed=args.seed)
    cert = certificate("fftp", p, {"k": args.k, "length": args.length, "samples": args.samples,
                                   "seed": args.seed}, r, r.passed)
    rows = [[r.k, r.L_max, r.non_geodesic_words, r.passed, r.counterexample or ""]]
    return _emit(args, cert, rows, ["k", "length", "non_geodesic_words", "passed", "counterexample"])


def cmd_normalize(args) -> int:
    p = args.presentation
    nf = normalize(parse_word(" ".join(args.word)), p)
    d = distance(TreeOracle(p), nf)
    cert = certificate("normalize", p, {"word": " ".join(args.word)},
                       {"normal_form": nf.format(p), "key": list(nf.key), "length": d}, True)
    return _emit(args, cert, [[nf.format(p), d]], ["normal_form", "length"])


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hnnpatterns", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--presentation", "-p", type=_presentation, default="g11",
                        help="built-in name (g11, gw) or a JSON presentation file")
    common.add_argument("--output", "-o", help="write here instead of stdout")
    common.add_argument("--format", "-f", choices=("json", "csv", "table"), default="table")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized sampling")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ball", parents=[common], help="build and cache B(N), print sphere sizes")
    s.add_argument("--radius", "-N", type=_nonneg, required=True)
    s.add_argument("--cache", help="cache file (default <name>_ball_<N>.npz)")
    s.set_defaults(func=cmd_ball)

    s = sub.add_parser("sequences", parents=[common], help="every strip sequence within B(N)")
    s.add_argument("--radius", "-N", type=_nonneg, required=True)
    s.set_defaults(func=cmd_sequences)

    s = sub.add_parser("moves", parents=[common], help="patterns reachable by moves")
    s.add_argument("--depth", type=_nonneg, required=True)
    s.add_argument("--mode", choices=("pattern", "sequence"), default="pattern")
    s.set_defaults(func=cmd_moves)

    s = sub.add_parser("nonreg", parents=[common], help="cut points of b^-1 s^n x^k")
    s.add_argument("--n-max", type=_nonneg, default=3)
    s.add_argument("--direction", default="a", help="base letter x (default a)")
    s.set_defaults(func=cmd_nonreg)

    s = sub.add_parser("fellow", parents=[common], help="unique geodesic pair audit for n = 1..N")
    s.add_argument("--n", type=_nonneg, default=2)
    s.set_defaults(func=cmd_fellow)

    s = sub.add_parser("ac", parents=[common], help="almost convexity audit on S(N)")
    s.add_argument("--radius", "-N", type=_nonneg, required=True)
    s.add_argument("--start", type=_nonneg, default=None, help="also audit spheres from here up")
    s.add_argument("--k", type=_nonneg, default=None, help="base FFTP constant (default: measured)")
    s.add_argument("--cap", type=_nonneg, default=None, help="allowed path length (default 10k+2)")
    s.add_argument("--cache", help="ball cache file to reuse")
    s.set_defaults(func=cmd_ac)

    s = sub.add_parser("fftp", parents=[common], help="falsification by fellow traveler in the base group")
    s.add_argument("--k", type=_nonneg, required=True)
    s.add_argument("--length", type=_nonneg, default=8, help="exhaustive word length")
    s.add_argument("--samples", type=_nonneg, default=0, help="random longer words to check")
    s.set_defaults(func=cmd_fftp)

    s = sub.add_parser("normalize", parents=[common], help="normal form and length of a word")
    s.add_argument("word", nargs="+")
    s.set_defaults(func=cmd_normalize)
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if getattr(args, "start", "unset") is None:
        args.start = args.radius
    if getattr(args, "n_max", 0) > MAX_WITNESS_N or (args.command == "fellow" and args.n > MAX_WITNESS_N):
        ap.error(f"witness words are limited to n <= {MAX_WITNESS_N}")
    try:
        return args.func(args)
    except (MalformedWordError, PreconditionError) as e:
        ap.error(str(e))
    except ResourceError as e:
        print(f"hnnpatterns: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
