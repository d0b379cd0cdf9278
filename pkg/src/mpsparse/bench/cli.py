"""``mpsparse`` command line: fetch, spmv, solve and suite."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from ..kernels.spmv import KernelMode
from ..krylov.solvers import Method, SolverConfig, solve
from ..mpfloat.precision import Precision
from ..sparsemat import load_mtx
from ..sparsemat.formats import ComplexSparseMatrix
from ..sparsemat.ops import structure_stats
from .fetch import FetchError, fetch_matrix
from .records import time_kernel
from .suite import (ConfigError, SuiteConfig, write_history, matrix_label, rhs_for,
                    run_suite)


def _precision(text: str) -> Precision:
    try:
        return Precision.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return text == "on"


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cache-dir", default=None,
                        help="matrix cache (default: $MPSPARSE_CACHE or ~/.cache/mpsparse)")
    common.add_argument("--offline", action="store_true", help="never download; require a cache hit")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="mpsparse", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fetch", parents=[common], help="download a collection matrix into the cache")
    f.add_argument("name", help="collection name, Group/name or a local .mtx path")

    s = sub.add_parser("spmv", parents=[common], help="time one SpMV/SpTMV configuration")
    s.add_argument("mtx", help="path or collection name")
    s.add_argument("--precision", type=_precision, default=Precision.parse("dd"),
                   help="f64, dd, td, qd or mpfr:<bits>")
    s.add_argument("--mode", choices=("p", "m"), default="p")
    s.add_argument("--threads", type=_positive, default=os.cpu_count() or 1)
    s.add_argument("--lanes", type=_on_off, default=True, metavar="{on,off}")
    s.add_argument("--transposed", action="store_true")
    s.add_argument("--reps", type=_positive, default=5)

    v = sub.add_parser("solve", parents=[common], help="solve A x = A v with a Krylov method")
    v.add_argument("mtx", help="path or collection name")
    v.add_argument("--method", choices=[m.value for m in Method], default="cg")
    v.add_argument("--precision", type=_precision, default=Precision.parse("dd"))
    v.add_argument("--mode", choices=("p", "m"), default="p")
    v.add_argument("--rtol", type=float, default=1e-13)
    v.add_argument("--atol", type=float, default=1e-99)
    v.add_argument("--max-iters", type=_positive, default=10000)
    v.add_argument("--threads", type=_positive, default=1)
    v.add_argument("--history", default=None, help="write the residual history to this CSV")

    u = sub.add_parser("suite", parents=[common], help="run a YAML/JSON benchmark suite")
    u.add_argument("config")
    u.add_argument("--output-dir", default=None)
    return p


def _load(args):
    path = fetch_matrix(args.mtx, args.cache_dir, offline=args.offline)
    return load_mtx(path, require_square=True), matrix_label(str(args.mtx))


def _cmd_fetch(args) -> int:
    path = fetch_matrix(args.name, args.cache_dir, offline=args.offline)
    A = load_mtx(path)
    stats = structure_stats(A)
    print(json.dumps({"path": str(path), "n": stats.nrows, "nnz": stats.nnz,
                      "complex": isinstance(A, ComplexSparseMatrix)}))
    return 0


def _cmd_spmv(args) -> int:
    A, name = _load(args)
    mode = KernelMode(args.precision, args.mode, transposed=args.transposed,
                      threads=args.threads, lanes_enabled=args.lanes)
    kernel = "sptmv" if args.transposed else "spmv"
    rec = time_kernel(A, kernel, mode, args.reps, name=name)
    print(json.dumps(rec.to_json()))
    return 0


def _cmd_solve(args) -> int:
    A, name = _load(args)
    if isinstance(A, ComplexSparseMatrix):
        print("error: solvers take real matrices", file=sys.stderr)
        return 2
    b, _ = rhs_for(A, args.precision)
    cfg = SolverConfig(method=args.method, precision=args.precision, matrix_mode=args.mode,
                       rel_tol=args.rtol, abs_tol=args.atol, max_iters=args.max_iters,
                       threads=args.threads)
    _, report = solve(A, b, cfg)
    if args.history:
        write_history(Path(args.history), report.residual_history, report.b_norm)
    print(json.dumps({"matrix": name, "n": A.nrows, "nnz": A.nnz, **report.as_dict()}))
    return 0 if report.converged else 1


def _cmd_suite(args) -> int:
    cfg = SuiteConfig.load(args.config)
    if args.cache_dir:
        cfg.cache_dir = args.cache_dir
    if args.offline:
        cfg.offline = True
    result = run_suite(cfg, args.output_dir)
    for key, path in result.paths.items():
        print(f"{key}: {path}")
    for name, err in result.failures.items():
        print(f"failed: {name}: {err}", file=sys.stderr)
    return result.exit_code


_COMMANDS = {"fetch": _cmd_fetch, "spmv": _cmd_spmv, "solve": _cmd_solve, "suite": _cmd_suite}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except (FetchError, ConfigError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
