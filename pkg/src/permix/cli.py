"""Command-line entry point ``permix``.

Data goes to standard output and progress to standard error. JSON output
is deterministic for a fixed configuration; wall-clock runtimes are only
included with ``--timing``.

Permutation literals take one of two forms:

``[2,0,1,3]``
    one-line form, the images of 0, 1, ..., N-1;
``(0 1 2)(3 4)``
    disjoint cycles, entries separated by spaces. Points not mentioned are
    fixed, so the degree comes from ``--N``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__, acceptance, census, specmat
from .permcore import MapFamily, Permutation, classify_mixing_fast, classify_mixing_oracle, parse_permutation

COMMANDS = ("classify", "spectrum", "rate", "worst", "enumerate", "sample", "tables", "subshift", "verify")
TABLE2_N = (8, 30, 40, 50)
TABLE2_M = (2, 3)


class UsageError(Exception):
    pass


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("PERMIX_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"PERMIX_THREADS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def _progress(args, msg: str) -> None:
    if not args.quiet:
        print(msg, file=sys.stderr, flush=True)


def _need(args, *names) -> None:
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.command} requires {', '.join(missing)}")


def _sigma(args) -> Permutation:
    _need(args, "sigma")
    sigma = parse_permutation(args.sigma, args.N)
    if args.N is not None and sigma.n != args.N:
        raise UsageError(f"--sigma has degree {sigma.n} but --N is {args.N}")
    return sigma


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def _csv(rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _scalar(v) -> str:
    if isinstance(v, (list, tuple, dict)):
        return json.dumps(v)
    if v is None:
        return ""
    return str(v)


def _emit(args, payload, table: Optional[list[list]] = None) -> None:
    """Write ``payload`` (a dict or list of dicts) in the requested format.

    ``table`` overrides the default CSV layout, which is one header row of
    keys followed by one row per record.
    """
    out = args.output
    records = payload if isinstance(payload, list) else [payload]
    if out == "json":
        text = json.dumps(payload, indent=2, ensure_ascii=False) + "\n"
    elif out == "csv":
        if table is None:
            keys = list(records[0].keys()) if records else []
            table = [keys] + [[_scalar(r.get(k)) for k in keys] for r in records]
        text = _csv(table)
    else:
        lines = []
        for r in records:
            lines += [f"{k}: {_scalar(v)}" for k, v in r.items()]
            lines.append("")
        text = "\n".join(lines[:-1]) + "\n"
    sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_classify(args) -> int:
    if args.family == "subshift":
        _need(args, "ell")
        args.N = 2 * args.ell if args.N is None else args.N
        sigma = _sigma(args)
        verdict = classify_mixing_oracle(sigma, MapFamily.subshift(args.ell))
    else:
        _need(args, "m", "N")
        sigma = _sigma(args)
        if args.oracle:
            verdict = classify_mixing_oracle(sigma, MapFamily.multiply(args.m, args.N))
        else:
            verdict = classify_mixing_fast(sigma, args.m, args.N)
    _emit(args, verdict.to_dict())
    return 0


def cmd_spectrum(args) -> int:
    _need(args, "m")
    if args.matrix == "C":
        _need(args, "N")
        M = specmat.build_C(args.m, args.N).astype(float)
        lam = None
    else:
        sigma = _sigma(args)
        if args.matrix == "BQ":
            M = specmat.build_B(args.m, sigma.n) @ specmat.build_Q(sigma, args.m) / args.m
        else:
            M = specmat.transition_matrix(sigma, args.m) / args.m
        lam = specmat.lambda_sigma(sigma, args.m, args.tol).lambda_sigma
    spec = specmat.eigen_spectrum(M, args.tol)
    d = spec.to_dict(lam)
    if args.output == "csv":
        table = [["re", "im", "mult"]] + [[repr(v.real), repr(v.imag), k] for v, k in spec.eigenvalues]
        _emit(args, d, table)
    else:
        _emit(args, d)
    return 0


def cmd_rate(args) -> int:
    _need(args, "m")
    sigma = _sigma(args)
    _emit(args, specmat.lambda_sigma(sigma, args.m, args.tol).to_dict())
    return 0


def cmd_worst(args) -> int:
    _need(args, "m", "N")
    tau = specmat.worst_permutation(args.m, args.N)
    bound = specmat.worst_rate_bound(args.m, args.N)
    lam = specmat.lambda_sigma(tau, args.m, args.tol).lambda_sigma
    _emit(args, {"m": args.m, "N": args.N, "tau": list(tau.images), "bound": bound, "lambda_tau": lam})
    return 0


def cmd_enumerate(args) -> int:
    workers = _threads(args)
    if args.ell is not None:
        _need(args, "m")
        brute = census.p_exact_bruteforce(args.ell, args.m, long_run=args.long_run, workers=workers)
        d = {"ell": args.ell, "m": args.m, "N": args.ell * args.m, "p_exhaustive": str(brute)}
        if args.ell <= 4:
            d["p_closed_form"] = str(census.p_closed_form(args.ell, args.m))
        d["p_upper_bound_sum"] = str(census.p_upper_bound_sum(args.ell, args.m))
        _emit(args, d)
        return 0
    _need(args, "m", "N")
    _progress(args, f"sweeping S_{args.N} for m={args.m}")
    row = census.slowdown_census(args.m, args.N, args.tol, long_run=args.long_run, workers=workers)
    _emit(args, row.to_dict(args.timing))
    return 0


def cmd_sample(args) -> int:
    _need(args, "m", "N")
    est = census.mc_slowdown(args.m, args.N, args.samples, args.seed, args.tol, workers=_threads(args))
    _emit(args, est.to_dict(args.timing))
    return 0


def _table1(args, workers) -> list[dict]:
    rows = []
    for N in (3, 4, 6, 8):
        for m in (2, 3, 4):
            _progress(args, f"table 1: N={N} m={m}")
            rows.append(census.slowdown_census(m, N, args.tol, workers=workers).to_dict(args.timing))
    return rows


def _table2(args, workers) -> list[dict]:
    rows = []
    for N in TABLE2_N:
        for m in TABLE2_M:
            _progress(args, f"table 2: N={N} m={m}")
            rows.append(census.mc_slowdown(m, N, args.samples, args.seed, args.tol, workers=workers).to_dict(args.timing))
    return rows


def cmd_tables(args) -> int:
    workers = _threads(args)
    payload = {}
    if args.which in ("1", "all"):
        payload["table1"] = _table1(args, workers)
    if args.which in ("2", "all"):
        payload["table2"] = _table2(args, workers)
    if args.output == "csv":
        table = [["table", "N", "m", "value"]]
        for r in payload.get("table1", []):
            table.append([1, r["N"], r["m"], r["slow_count"]])
        for r in payload.get("table2", []):
            table.append([2, r["N"], r["m"], f"{r['proportion']:.4f}"])
        _emit(args, payload, table)
    elif args.output == "text":
        sys.stdout.write(_tables_text(payload))
    else:
        _emit(args, payload)
    return 0


def _tables_text(payload: dict) -> str:
    lines = []
    if "table1" in payload:
        lines.append("Table 1: permutations in S_N slowing the mixing rate")
        lines.append(f"{'N':>4} {'m=2':>8} {'m=3':>8} {'m=4':>8}")
        by = {(r["N"], r["m"]): r["slow_count"] for r in payload["table1"]}
        for N in sorted({k[0] for k in by}):
            lines.append(f"{N:>4} " + " ".join(f"{by[(N, m)]:>8}" for m in (2, 3, 4)))
        lines.append("")
    if "table2" in payload:
        lines.append("Table 2: sampled proportion slowing the mixing rate")
        lines.append(f"{'N':>4} {'m=2':>8} {'m=3':>8}")
        by = {(r["N"], r["m"]): r["proportion"] for r in payload["table2"]}
        for N in sorted({k[0] for k in by}):
            lines.append(f"{N:>4} " + " ".join(f"{by[(N, m)]:>8.4f}" for m in TABLE2_M))
        lines.append("")
    return "\n".join(lines)


def cmd_subshift(args) -> int:
    _need(args, "ell")
    model = specmat.subshift_model()
    r_ess, entropy = specmat.r_ess_and_entropy(model)
    row = census.subshift_census(args.ell, long_run=args.long_run, workers=_threads(args))
    d = {
        "ell": args.ell,
        "fredholm_zeros": [[z.real + 0.0, z.imag + 0.0] for z in specmat.fredholm_zeros(model)],
        "density": [str(x) for x in specmat.invariant_density(model)],
        "r_ess": r_ess,
        "entropy": entropy,
        "census": row.to_dict(args.timing),
        "witness_proportion": str(census.subshift_witness_count(args.ell)),
    }
    _emit(args, d)
    return 0


def cmd_verify(args) -> int:
    numbers = args.criteria or sorted(acceptance.CRITERIA)
    bad = [n for n in numbers if n not in acceptance.CRITERIA]
    if bad:
        raise UsageError(f"unknown criteria {bad}; choose from 1..{len(acceptance.CRITERIA)}")
    workers = _threads(args)
    results = []
    for n in numbers:
        _progress(args, f"criterion {n} ...")
        r = acceptance.run_criterion(n, workers=workers, seed=args.seed, long_run=args.long_run)
        results.append(r)
        if args.output == "text":
            print(acceptance.format_line(r), flush=True)
    if args.output == "json":
        _emit(args, [r.to_dict() for r in results])
    elif args.output == "csv":
        table = [["criterion", "check", "passed", "detail"]]
        for r in results:
            table += [[r.number, c.name, c.passed, c.detail] for c in r.checks]
        _emit(args, {}, table)
    return 0 if all(r.passed for r in results) else 1


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--m", type=_positive, help="expansion factor of x -> m x mod 1")
    common.add_argument("--N", type=_positive, help="number of equal subintervals")
    common.add_argument("--ell", type=_positive, help="N/m for the multiply map, N/2 for the subshift map")
    common.add_argument("--sigma", help='permutation, "[2,0,1]" or "(0 1 2)"')
    common.add_argument("--seed", type=_seed, default=acceptance.DEFAULT_SEED, help="64-bit seed (default %(default)s)")
    common.add_argument("--samples", type=_positive, default=10_000, help="Monte Carlo sample count (default %(default)s)")
    common.add_argument("--tol", type=float, default=specmat.UNIT_TOL, help="unit-circle tolerance (default %(default)s)")
    common.add_argument("--output", choices=("json", "csv", "text"),
                        help="output format (default: text for verify, json otherwise)")
    common.add_argument("--long-run", action="store_true", help="lift the size caps on exhaustive sweeps")
    common.add_argument("--threads", type=_positive, help="worker processes (default: PERMIX_THREADS or CPU count)")
    common.add_argument("--timing", action="store_true", help="include wall-clock runtimes in the output")
    common.add_argument("--quiet", action="store_true", help="suppress progress on standard error")

    parser = argparse.ArgumentParser(
        prog="permix",
        description="Mixing of x -> m x mod 1 composed with interval-exchange permutations.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("classify", parents=[common], help="mixing verdict with a witness")
    p.add_argument("--family", choices=("multiply", "subshift"), default="multiply")
    p.add_argument("--oracle", action="store_true", help="use the subset-orbit oracle")

    p = sub.add_parser("spectrum", parents=[common], help="eigenvalues of a transition or Fredholm matrix")
    p.add_argument("--matrix", choices=("AP", "BQ", "C"), default="AP",
                   help="A P(sigma)/m (default), B Q(sigma)/m, or the circulant C(m,N)")

    sub.add_parser("rate", parents=[common], help="mixing rate report for one permutation")
    sub.add_parser("worst", parents=[common], help="the slowest permutation and its rate")
    sub.add_parser("enumerate", parents=[common], help="exhaustive census over S_N (or p(ell,m) with --ell)")
    sub.add_parser("sample", parents=[common], help="Monte Carlo slowdown proportion")

    p = sub.add_parser("tables", parents=[common], help="reproduce the slowdown tables")
    p.add_argument("--which", choices=("1", "2", "all"), default="all")

    sub.add_parser("subshift", parents=[common], help="subshift map facts and census")

    p = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    p.add_argument("--criteria", type=int, nargs="+", help="criterion numbers (default: all)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.output is None:
        args.output = "text" if args.command == "verify" else "json"
    try:
        return HANDLERS[args.command](args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"permix: error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"permix: error: {e}", file=sys.stderr)
        return 2
    except (ArithmeticError, AssertionError, np.linalg.LinAlgError) as e:
        print(f"permix: computation failed: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
