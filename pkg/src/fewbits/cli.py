"""Command line front end.

Results go to stdout (or ``--out``) as JSON lines; the run manifest and
diagnostics go to stderr.  Exit codes: 0 ok, 2 usage, 3 resource ceiling,
4 strategy disagreement, 5 internal verification alarm, 130 interrupted.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from typing import Sequence

from . import __version__, _kernels
from .carrylab import (
    ALLOWED_SIGNATURES,
    DEFAULT_CAP,
    OperandError,
    cluster_signature,
    power_partitions,
    xi_set,
)
from .families import FamilyError, VerificationAlarm, k3_family, thm3_generate, thm3_scan
from .solver import (
    DEFAULT_CEILING,
    MissingBoundError,
    ResourceCeilingError,
    SolveOptions,
    SolverError,
    Strategy,
    solve,
    solve_square,
    verify_bound,
)
from .sparsebin import SparseBin, mul

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CEILING = 3
EXIT_DISAGREE = 4
EXIT_ALARM = 5
EXIT_INTERRUPTED = 130

JOBS_ENV = "FEWBITS_JOBS"
CSV_FIELDS = ["a_dec", "b_dec", "k", "l", "m", "product_dec", "strategy", "complete"]
STRATEGIES = {"pair": Strategy.PAIR_FIRST, "product": Strategy.PRODUCT_FIRST}


class UsageError(Exception):
    pass


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"))


def _decimal(text: str) -> int:
    text = text.strip()
    if not text.isdigit():
        raise argparse.ArgumentTypeError(f"not a nonnegative decimal integer: {text!r}")
    return int(text)


def _resolve_jobs(flag: int | None) -> tuple[int, str]:
    if flag is not None:
        return max(1, flag), "flag"
    env = os.environ.get(JOBS_ENV)
    if env:
        try:
            return max(1, int(env)), "env"
        except ValueError:
            raise UsageError(f"{JOBS_ENV}={env!r} is not an integer")
    return 1, "default"


class Run:
    """Collects output rows, then writes manifest (stderr) and rows (stdout/--out)."""

    def __init__(self, argv: Sequence[str], command: str, params: dict, jobs: int = 1, jobs_source: str = "default"):
        self.argv = list(argv)
        self.command = command
        self.params = params
        self.jobs = jobs
        self.jobs_source = jobs_source
        self.t0 = time.perf_counter()
        self.rows: list[dict] = []
        self.complete = False

    def manifest(self, status: str, truncated: bool = False) -> dict:
        return {
            "manifest": {
                "command_line": ["fewbits", *self.argv],
                "command": self.command,
                "parameters": self.params,
                "workers": self.jobs,
                "workers_source": self.jobs_source,
                "determinism": "output is sorted and independent of worker count; no randomness",
                "kernel_backend": _kernels.backend_name(),
                "wall_time_s": round(time.perf_counter() - self.t0, 6),
                "result_count": len(self.rows),
                "complete": self.complete,
                "truncated": truncated,
                "status": status,
                "version": __version__,
            }
        }

    def emit_manifest(self, status: str = "ok", truncated: bool = False) -> None:
        print(_dumps(self.manifest(status, truncated)), file=sys.stderr)


def _write_rows(rows: list[dict], fmt: str, out_path: str | None) -> None:
    buf = io.StringIO()
    if fmt == "csv":
        writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({**row, "complete": "true" if row["complete"] else "false"})
    else:
        for row in rows:
            buf.write(_dumps(row) + "\n")
    text = buf.getvalue()
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


# commands -----------------------------------------------------------------

def cmd_solve(args, argv) -> int:
    jobs, source = _resolve_jobs(args.jobs)
    params = {"k": args.k, "l": args.l, "m": args.m, "bound_exp": args.bound_exp, "strategy": args.strategy,
              "dedup_symmetric": args.dedup_symmetric, "ceiling": args.ceiling}
    run = Run(argv, "solve", params, jobs, source)
    opts = SolveOptions(dedup_symmetric=args.dedup_symmetric, jobs=jobs, ceiling=args.ceiling)
    bound = args.bound_exp
    if args.strategy == "both":
        pair = solve(args.k, args.l, args.m, bound, Strategy.PAIR_FIRST, opts)
        prod = solve(args.k, args.l, args.m, bound, Strategy.PRODUCT_FIRST, opts)
        ps, qs = {r.pair() for r in pair}, {r.pair() for r in prod}
        if ps != qs:
            run.emit_manifest(status="strategy_disagreement")
            diff = {"only_pair_first": sorted(ps - qs), "only_product_first": sorted(qs - ps)}
            print(_dumps({"symmetric_difference": {k: [[str(a), str(b)] for a, b in v] for k, v in diff.items()}}),
                  file=sys.stderr)
            return EXIT_DISAGREE
        records = pair
    else:
        records = solve(args.k, args.l, args.m, bound, STRATEGIES[args.strategy], opts)
    run.rows = [r.to_dict() for r in records]
    # reaching here without --bound-exp means a proved product bound was searched
    run.complete = bound is None
    run.emit_manifest()
    _write_rows(run.rows, args.format, args.out)
    return EXIT_OK


def cmd_verify_bound(args, argv) -> int:
    params = {"k": args.k, "l": args.l, "m": args.m, "slack_exp": args.slack_exp, "ceiling": args.ceiling}
    jobs, source = _resolve_jobs(args.jobs)
    run = Run(argv, "verify-bound", params, jobs, source)
    report = verify_bound(args.k, args.l, args.m, args.slack_exp,
                          SolveOptions(jobs=jobs, ceiling=args.ceiling))
    row = report.to_dict()
    row["result"] = "pass" if report.passed else "fail"
    run.rows = [row]
    run.complete = True
    run.emit_manifest(status="ok" if report.passed else "verification_failure")
    _write_rows(run.rows, "jsonl", args.out)
    return EXIT_OK if report.passed else EXIT_ALARM


def cmd_square(args, argv) -> int:
    params = {"k": args.k, "bound_exp": args.bound_exp, "ceiling": args.ceiling}
    run = Run(argv, "square", params)
    values = solve_square(args.k, args.bound_exp, SolveOptions(ceiling=args.ceiling))
    rows = []
    for a in values:
        sa, sq = SparseBin.from_int(a), SparseBin.from_int(a * a)
        rows.append({"a_dec": str(a), "a_exps": list(sa.exponents), "s_a": sa.popcount(),
                     "square_dec": str(a * a), "square_exps": list(sq.exponents), "k": args.k})
    run.rows = rows
    run.complete = True
    run.emit_manifest()
    _write_rows(rows, "jsonl", args.out)
    return EXIT_OK


def cmd_family(args, argv) -> int:
    if args.family == "thm3":
        params = {"family": "thm3", "n": args.n, "N": args.N, "scan_L": args.scan_L, "count": args.count}
        run = Run(argv, "family", params)
        if args.scan_L is not None:
            n, stream = thm3_scan(args.scan_L)
            gen = stream()
            rows = [next(gen).to_dict() for _ in range(args.count)]
        else:
            if args.n is None or args.N is None:
                raise UsageError("family thm3 needs --n and --N, or --scan-L")
            rows = [thm3_generate(args.n, args.N).to_dict()]
    else:
        params = {"family": "k3", "c": args.c}
        run = Run(argv, "family", params)
        rec = k3_family(args.c)
        row = rec.to_dict()
        row.update(family="k3", c=args.c, s_ab=rec.product.popcount())
        rows = [row]
    run.rows = rows
    run.emit_manifest()
    _write_rows(rows, "jsonl", args.out)
    return EXIT_OK


def cmd_analyze(args, argv) -> int:
    params = {"a": str(args.a), "b": str(args.b), "cap": args.cap}
    run = Run(argv, "analyze", params)
    a, b = SparseBin.from_int(args.a), SparseBin.from_int(args.b)
    try:
        xi = xi_set(a, b)
        signature = cluster_signature(a, b)
    except OperandError as exc:
        raise UsageError(str(exc)) from exc
    ab = mul(a, b)
    parts = power_partitions(xi, ab.popcount() - 1, args.cap)
    row = {
        "a_dec": str(a),
        "b_dec": str(b),
        "a_exps": list(a.exponents),
        "b_exps": list(b.exponents),
        "s_a": a.popcount(),
        "s_b": b.popcount(),
        "s_ab": ab.popcount(),
        "product_dec": str(ab),
        "product_exps": list(ab.exponents),
        "xi": [{"pair": list(p), "sum": s} for p, s in zip(xi.pairs, xi.sums)],
        "partitions": [
            {"parts": [[list(p) for p in part] for part in pp.parts], "powers": list(pp.powers)} for pp in parts
        ],
        "partition_cap": args.cap,
        "cluster_window": a.popcount() * b.popcount(),
        "cluster_signature": list(signature),
        "signature_in_allowed_set": signature in ALLOWED_SIGNATURES,
    }
    run.rows = [row]
    run.emit_manifest()
    _write_rows(run.rows, "jsonl", args.out)
    return EXIT_OK


# parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fewbits", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"fewbits {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, jobs=True):
        sp.add_argument("--out", metavar="PATH", help="write results here instead of stdout")
        sp.add_argument("--ceiling", type=int, default=DEFAULT_CEILING,
                        help=f"largest bound exponent allowed (default {DEFAULT_CEILING})")
        if jobs:
            sp.add_argument("--jobs", type=int, default=None, help=f"worker processes (default ${JOBS_ENV} or 1)")

    sp = sub.add_parser("solve", help="enumerate solutions of s(ab)=k, s(a)=l, s(b)=m")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--l", type=int, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--bound-exp", type=int, default=None,
                    help="user bound: search a, b < 2^E (mandatory where no product bound is proved)")
    sp.add_argument("--strategy", choices=["pair", "product", "both"], default="pair")
    sp.add_argument("--dedup-symmetric", action="store_true", help="when l == m keep only a <= b")
    sp.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    common(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("verify-bound", help="search past a proved product bound")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--l", type=int, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--slack-exp", type=int, required=True)
    common(sp)
    sp.set_defaults(func=cmd_verify_bound)

    sp = sub.add_parser("square", help="odd a < 2^E with s(a^2) = k")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--bound-exp", type=int, required=True)
    common(sp, jobs=False)
    sp.set_defaults(func=cmd_square)

    sp = sub.add_parser("family", help="generate verified members of the infinite families")
    fam = sp.add_subparsers(dest="family", required=True)
    t3 = fam.add_parser("thm3", help="k=4 family from X^9+1")
    t3.add_argument("--n", type=int)
    t3.add_argument("--N", type=int)
    t3.add_argument("--scan-L", type=int, default=None, help="smallest n with s(a), s(b) >= L")
    t3.add_argument("--count", type=int, default=1, help="instances to emit with --scan-L")
    common(t3, jobs=False)
    t3.set_defaults(func=cmd_family)
    k3 = fam.add_parser("k3", help="a = b = 2^c + 1")
    k3.add_argument("--c", type=int, required=True)
    common(k3, jobs=False)
    k3.set_defaults(func=cmd_family)

    sp = sub.add_parser("analyze", help="carry analysis of one pair")
    sp.add_argument("--a", type=_decimal, required=True)
    sp.add_argument("--b", type=_decimal, required=True)
    sp.add_argument("--cap", type=int, default=DEFAULT_CAP, help="max power partitions to list")
    common(sp, jobs=False)
    sp.set_defaults(func=cmd_analyze)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    def fail(code: int, msg: str) -> int:
        print(f"fewbits: error: {msg}", file=sys.stderr)
        return code

    try:
        return args.func(args, argv)
    except KeyboardInterrupt:
        Run(argv, args.command, {}).emit_manifest(status="interrupted", truncated=True)
        return EXIT_INTERRUPTED
    except ResourceCeilingError as exc:
        return fail(EXIT_CEILING, str(exc))
    except VerificationAlarm as exc:
        return fail(EXIT_ALARM, f"verification alarm: {exc}")
    except (UsageError, MissingBoundError, SolverError, FamilyError, OperandError, ValueError) as exc:
        return fail(EXIT_USAGE, str(exc))


if __name__ == "__main__":
    sys.exit(main())
