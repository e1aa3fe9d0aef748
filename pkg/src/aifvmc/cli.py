"""Command-line interface.

Exit codes: 0 success, 1 bad input, 2 broken internal invariant or failed
verification.
"""
from __future__ import annotations

import argparse
import csv
import io as _stdio
import json
import os
import random
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import io
from .aifv import REDUCTIONS, aifv_problem
from .codec import decode, encode, pack_bits, unpack_bits
from .core import eval_envelope, format_rational, format_vector, multi_typed_intersection, to_rational
from .errors import AifvmcError, InputError, InternalError
from .oracle import brute_force_min, grid_points
from .slice import boundary_sign_check, solve_slice_search
from .solver import solve_iterative
from . import verify as suites

THREADS_ENV = "AIFVMC_THREADS"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _result_line(chain, point) -> str:
    return f"chain={format_vector(chain)} x={format_vector(point.x)} cost={point.y}"


def _write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)


def _parse_start(text: str | None):
    if text is None:
        return None
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise InputError(f"--start expects comma-separated integers, got {text!r}") from None


def _brute(problem):
    report = brute_force_min(problem)
    if report.top_chain is None:
        raise InternalError("no cheapest chain meets the polytope surface")
    return report.top_chain, multi_typed_intersection(problem.chain(report.top_chain))


# -- commands -----------------------------------------------------------------


def cmd_solve_mcmc(args) -> int:
    problem = io.read_problem(args.problem)
    if args.algo == "brute":
        chain, point = _brute(problem)
        print(_result_line(chain, point))
        return 0
    result = solve_iterative(problem, _parse_start(args.start))
    print(_result_line(result.chain, result.point))
    if args.trace:
        _write_csv(args.trace, result.trace.csv_rows())
    return 0


def cmd_solve_aifv(args) -> int:
    source = io.read_source(args.source)
    if args.algo == "slice" and args.m != 3:
        raise InputError(f"slice requires m=3, got m={args.m}")
    ap = aifv_problem(source, args.m, args.max_nodes, reduction=args.reduction)
    problem = ap.problem
    if args.algo == "slice":
        if source.n < 2 ** args.m - 1:
            print(f"warning: n={source.n} < 7, checking boundary signs explicitly", file=sys.stderr)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                report = boundary_sign_check(problem)
            if not report.ok:
                raise InputError(
                    "slice precondition fails: " + "; ".join(report.violations[:3])
                )
        result = solve_slice_search(problem)
        chain, point = result.chain, result.point
        if args.trace:
            rows = [["iteration", "l", "r", "e0", "e1"]]
            rows += [
                [str(s.iteration)] + [format_rational(v) for v in (s.l, s.r, s.e0, s.e1)]
                for s in result.search
            ]
            _write_csv(args.trace, rows)
    elif args.algo == "brute":
        chain, point = _brute(problem)
    else:
        result = solve_iterative(problem)
        chain, point = result.chain, result.point
        if args.trace:
            _write_csv(args.trace, result.trace.csv_rows())
    print(_result_line(chain, point))
    print(f"max_nodes={ap.max_nodes} states={format_vector(problem.sizes)}")
    code = ap.code(chain)
    for k, table in enumerate(code.tables()):
        words = " ".join(f"{s}:{w or 'ε'}/{d}" for s, (w, d) in sorted(table.items()))
        print(f"T_{k}: {words}")
    if args.out:
        Path(args.out).write_text(code.to_json())
    return 0


def _read_input(args, binary: bool):
    if args.input is not None and args.input_file is not None:
        raise InputError("give only one of --in and --input-file")
    if args.input is not None:
        return args.input.encode() if binary else args.input
    if args.input_file is not None:
        try:
            data = Path(args.input_file).read_bytes()
        except OSError as exc:
            raise InputError(f"cannot read {args.input_file}: {exc.strerror}") from None
        return data if binary else data.decode()
    raise InputError("give --in or --input-file")


def _emit(args, payload):
    if args.out:
        if isinstance(payload, bytes):
            Path(args.out).write_bytes(payload)
        else:
            Path(args.out).write_text(payload + "\n")
    elif isinstance(payload, bytes):
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()
    else:
        print(payload)


def cmd_encode(args) -> int:
    code = io.read_code(args.code)
    symbols = _read_input(args, binary=False).split()
    bits = encode(code, symbols)
    _emit(args, pack_bits(bits, len(symbols)) if args.binary else bits)
    return 0


def cmd_decode(args) -> int:
    code = io.read_code(args.code)
    if args.binary:
        count, bits = unpack_bits(_read_input(args, binary=True))
        if args.count is not None and args.count != count:
            raise InputError(f"--count {args.count} disagrees with container count {count}")
        symbols = decode(code, bits, count)
    else:
        if args.count is None:
            raise InputError("--count is required for ASCII bit strings")
        bits = "".join(_read_input(args, binary=False).split())
        symbols = decode(code, bits, args.count)
    _emit(args, " ".join(symbols))
    return 0


def _approx(v: Fraction) -> str:
    return f"≈{float(v):.6g}"


def cmd_envelope(args) -> int:
    problem = io.read_problem(args.problem)
    m = problem.m
    if m > 3:
        raise InputError(f"tabular envelope limited to m ≤ 3, got m={m}")
    if args.grid < 0:
        raise InputError("--grid must be nonnegative")
    dim = m - 1
    if args.box is None:
        lo, hi = [Fraction(0)] * dim, [Fraction(1)] * dim
    else:
        parts = [p for p in args.box.split(",") if p.strip()]
        if len(parts) != 2 * dim:
            raise InputError(f"--box needs {2 * dim} values lo1,hi1,... for m={m}")
        vals = [to_rational(p.strip()) for p in parts]
        lo, hi = vals[0::2], vals[1::2]
        if any(a > b for a, b in zip(lo, hi)):
            raise InputError("--box has lo > hi")
    names = [f"x{j + 1}" for j in range(dim)] + [f"g{k}" for k in range(m)] + ["h"]
    rows = [names + [f"{c}_approx" for c in names]]
    for x in grid_points(lo, hi, args.grid):
        gs = [eval_envelope(k, x, problem).value for k in range(m)]
        vals = list(x) + gs + [min(gs)]
        rows.append([format_rational(v) for v in vals] + [_approx(v) for v in vals])
    if args.out:
        _write_csv(args.out, rows)
    else:
        buf = _stdio.StringIO()
        csv.writer(buf).writerows(rows)
        sys.stdout.write(buf.getvalue())
    return 0


def cmd_verify(args) -> int:
    if (args.problem is None) == (args.source is None) and args.code is None:
        raise InputError("give --problem or --source (and optionally --code)")
    if args.problem is not None and args.source is not None:
        raise InputError("give only one of --problem and --source")
    problem, n, code = None, None, None
    if args.problem is not None:
        problem = io.read_problem(args.problem)
    elif args.source is not None:
        source = io.read_source(args.source)
        ap = aifv_problem(source, args.m, args.max_nodes)
        problem, n = ap.problem, source.n
        code = ap.code(solve_iterative(problem).chain)
    if args.code is not None:
        code = io.read_code(args.code, validate=False)

    wanted = suites.SUITES if args.suite == "all" else (args.suite,)
    threads = args.threads or int(os.environ.get(THREADS_ENV, "1") or 1)

    def run(name):
        rng = random.Random(f"{args.seed}:{name}")
        if name == "roundtrip":
            return suites.roundtrip(code, args.max_len)
        if problem is None:
            return suites.SuiteResult(name, skipped="no problem given")
        if name == "lemma4":
            return suites.descent_along_cones(problem, rng, args.trials)
        if name == "cones":
            return suites.cone_partition(problem.m, rng, args.trials)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return suites.boundary_signs(problem, n, args.samples)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(run, wanted))
    for r in results:
        print(r.summary())
    if args.report:
        Path(args.report).write_text(json.dumps([r.to_dict() for r in results], indent=1) + "\n")
    return 0 if all(r.ok for r in results) else 2


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="aifvmc", description="Minimum-cost Markov chains and AIFV-m codes, exactly.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve-mcmc", help="solve a Markov chain problem file")
    s.add_argument("--problem", required=True)
    s.add_argument("--algo", choices=("iterative", "brute"), default="iterative")
    s.add_argument("--start", help="comma-separated starting state indices")
    s.add_argument("--trace", help="write the iteration trace as CSV")
    s.set_defaults(func=cmd_solve_mcmc)

    s = sub.add_parser("solve-aifv", help="build an optimal AIFV-m code for a source")
    s.add_argument("--source", required=True)
    s.add_argument("--m", type=int, default=3)
    s.add_argument("--algo", choices=("iterative", "slice", "brute"), default="iterative")
    s.add_argument("--max-nodes", type=int, default=None, help="node cap per tree (default 3n+m)")
    s.add_argument("--reduction", choices=REDUCTIONS, default="envelope")
    s.add_argument("--out", help="write the code file here")
    s.add_argument("--trace", help="write the iteration or search trace as CSV")
    s.set_defaults(func=cmd_solve_aifv)

    for name, func, text in (
        ("encode", cmd_encode, "encode whitespace-separated symbols"),
        ("decode", cmd_decode, "decode a bit string"),
    ):
        s = sub.add_parser(name, help=text)
        s.add_argument("--code", required=True)
        s.add_argument("--in", dest="input")
        s.add_argument("--input-file")
        s.add_argument("--count", type=int)
        s.add_argument("--binary", action="store_true", help="packed container instead of ASCII bits")
        s.add_argument("--out")
        s.set_defaults(func=func)

    s = sub.add_parser("envelope", help="tabulate g_0..g_{m-1} and h on a grid")
    s.add_argument("--problem", required=True)
    s.add_argument("--grid", type=int, default=10, help="intervals per axis")
    s.add_argument("--box", help="lo1,hi1[,lo2,hi2] (default unit box)")
    s.add_argument("--out")
    s.set_defaults(func=cmd_envelope)

    s = sub.add_parser("verify", help="run property suites")
    s.add_argument("--problem")
    s.add_argument("--source")
    s.add_argument("--code")
    s.add_argument("--m", type=int, default=3)
    s.add_argument("--max-nodes", type=int, default=None)
    s.add_argument("--suite", choices=suites.SUITES + ("all",), default="all")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--threads", type=int, default=None, help=f"worker threads (default ${THREADS_ENV} or 1)")
    s.add_argument("--trials", type=int, default=10_000)
    s.add_argument("--samples", type=int, default=20)
    s.add_argument("--max-len", type=int, default=6)
    s.add_argument("--report", help="write a JSON report")
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # usage errors exit 1, --help exits 0
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (InternalError, AifvmcError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
