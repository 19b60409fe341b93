"""Command-line interface.

Exit codes: 0 success, 1 verification failure (``roundtrip``,
``oracle-check``), 2 usage or file-format error, 3 measurements
inconsistent with any polynomial.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .measurement import MeasurementSet, NodeSet, measure, measure_general, roots_of_unity
from .oracle import MAX_ORACLE_N, OracleBudgetExhausted, brute_force_reconstruct
from .poly import Polynomial, canonical_phase, global_phase_distance, random_polynomial, trial_seeds
from .reconstruct import ReconstructionError, reconstruct

logger = logging.getLogger("phaseret")

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_INCONSISTENT = 3

ORACLE_TOL = 1e-4


class UsageError(Exception):
    pass


def _configure_logging():
    level = os.environ.get("PHASERET_LOG", "off").lower()
    levels = {"info": logging.INFO, "debug": logging.DEBUG}
    if level in levels:
        logging.basicConfig(stream=sys.stderr, level=levels[level], format="%(name)s: %(message)s")


def _read_json(path: str) -> dict:
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _write_json(obj: dict, path: str | None):
    text = json.dumps(obj) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _parse_support(text: str, n: int) -> range:
    lo, sep, hi = text.partition("..")
    try:
        support = range(int(lo), int(hi) + 1) if sep else range(int(lo), int(lo) + 1)
    except ValueError:
        raise UsageError(f"support must look like 'a..b', got {text!r}") from None
    if len(support) == 0 or support.start < 0 or support.stop > n:
        raise UsageError(f"support {text!r} is not a nonempty range inside [0, {n - 1}]")
    return support


def cmd_gen(args) -> int:
    if args.n < 2:
        raise UsageError("--n must be at least 2")
    support = None if args.support is None else _parse_support(args.support, args.n)
    p = canonical_phase(random_polynomial(args.n, args.seed, support))
    _write_json(p.to_dict(), args.output)
    return EXIT_OK


def _load_nodes(path: str) -> NodeSet:
    try:
        return NodeSet.from_dict(_read_json(path))
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def cmd_measure(args) -> int:
    try:
        p = Polynomial.from_dict(_read_json(args.input))
        if p.n < 2:
            raise ValueError("polynomial dimension must be at least 2")
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.nodes_w is None and args.nodes_z is None:
        ms = measure(p)
    else:
        nw = _load_nodes(args.nodes_w) if args.nodes_w else roots_of_unity(2 * p.n - 1)
        nz = _load_nodes(args.nodes_z) if args.nodes_z else roots_of_unity(2 * p.n - 3)
        try:
            ms = measure_general(p, nw, nz)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    _write_json(ms.to_dict(), args.output)
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    try:
        ms = MeasurementSet.from_dict(_read_json(args.input))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    try:
        q = reconstruct(ms, args.tol)
    except ReconstructionError as exc:
        print(json.dumps({"error": exc.name, "message": str(exc)}), file=sys.stderr)
        return EXIT_INCONSISTENT
    _write_json(canonical_phase(q).to_dict(), args.output)
    return EXIT_OK


def _positive_trials(args):
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    if args.n < 2:
        raise UsageError("--n must be at least 2")


def cmd_roundtrip(args) -> int:
    _positive_trials(args)
    worst = 0.0
    passed = 0
    for i, s in enumerate(trial_seeds(args.seed, args.trials)):
        p = random_polynomial(args.n, s)
        try:
            err = global_phase_distance(reconstruct(measure(p)), p) / (1.0 + p.norm())
            note = ""
        except ReconstructionError as exc:
            err = float("inf")
            note = f" {exc.name}"
        ok = err <= args.tol
        passed += ok
        worst = max(worst, err)
        print(f"trial {i:4d}  distance {err:.3e}  {'PASS' if ok else 'FAIL'}{note}")
    verdict = "PASS" if passed == args.trials else "FAIL"
    print(f"n={args.n} trials={args.trials} seed={args.seed} tol={args.tol:.3e}")
    print(f"max distance {worst:.3e}  passed {passed}/{args.trials}  {verdict}")
    return EXIT_OK if verdict == "PASS" else EXIT_FAIL


def cmd_oracle_check(args) -> int:
    _positive_trials(args)
    if args.n > MAX_ORACLE_N:
        raise UsageError(f"oracle-check supports --n up to {MAX_ORACLE_N}")
    worst = 0.0
    passed = 0
    for i, s in enumerate(trial_seeds(args.seed, args.trials)):
        p = random_polynomial(args.n, s)
        ms = measure(p)
        scale = 1.0 + p.norm()
        try:
            err = global_phase_distance(brute_force_reconstruct(ms, seed=s), reconstruct(ms)) / scale
            note = ""
        except (ReconstructionError, OracleBudgetExhausted) as exc:
            err = float("inf")
            note = f" {type(exc).__name__}"
        ok = err <= ORACLE_TOL
        passed += ok
        worst = max(worst, err)
        print(f"trial {i:4d}  disagreement {err:.3e}  {'PASS' if ok else 'FAIL'}{note}")
    verdict = "PASS" if passed == args.trials else "FAIL"
    print(f"n={args.n} trials={args.trials} seed={args.seed} tol={ORACLE_TOL:.0e}")
    print(f"max disagreement {worst:.3e}  passed {passed}/{args.trials}  {verdict}")
    return EXIT_OK if verdict == "PASS" else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phaseret",
        description="Recover complex polynomials up to global phase from 4N-4 intensities.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a seeded random polynomial")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--support", help="inclusive index range a..b of nonzero coefficients")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("measure", help="measure a polynomial file")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output")
    p.add_argument("--nodes-w", help="node set for |p| (default: roots of unity)")
    p.add_argument("--nodes-z", help="node set for |p'| (default: roots of unity)")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("reconstruct", help="recover a polynomial from a measurement file")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output")
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("roundtrip", help="measure and reconstruct seeded random polynomials")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("oracle-check", help="compare against brute-force fitting (n <= 4)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"phaseret {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
