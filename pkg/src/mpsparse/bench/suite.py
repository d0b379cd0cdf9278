"""Declarative benchmark suites: kernels and solvers over a matrix list."""

from __future__ import annotations

import csv
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..kernels.spmv import KernelMode, MatrixMode, spmv
from ..krylov.solvers import Method, SolverConfig, solve
from ..mpfloat.precision import Precision
from ..sparsemat import load_mtx
from ..sparsemat.formats import ComplexSparseMatrix
from .fetch import fetch_matrix
from .records import (KERNELS, SCHEMA_VERSION, BenchRecord, summarize, time_kernel,
                      write_records, write_summary)
from .vectors import make_vector

log = logging.getLogger(__name__)

MIN_SUITE_REPS = 5


class ConfigError(ValueError):
    """The suite configuration is invalid."""


def _as_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    key = str(value).strip().lower()
    if key in ("on", "true", "yes", "1"):
        return True
    if key in ("off", "false", "no", "0"):
        return False
    raise ConfigError(f"expected on/off, got {value!r}")


def _as_list(value) -> list:
    if value is None:
        return []
    return list(value) if isinstance(value, (list, tuple)) else [value]


@dataclass
class SolverPlan:
    methods: list
    precisions: list
    mode: MatrixMode = MatrixMode.PURE
    rel_tol: float = 1e-13
    abs_tol: float = 1e-99
    max_iters: int = 10000
    threads: int = 1


@dataclass
class SuiteConfig:
    """Parsed suite configuration.

    YAML/JSON keys: ``matrices`` (names, ``Group/name`` or paths),
    ``kernels``, ``precisions``, ``modes``, ``threads``, ``lanes``, ``reps``,
    optional ``solvers`` (``methods``, ``precisions``, ``mode``, ``rtol``,
    ``atol``, ``max_iters``, ``threads``), ``cache_dir``, ``offline`` and
    ``output_dir``.  The baseline (1 thread, lanes off) is always measured.
    """

    matrices: list
    kernels: list = field(default_factory=lambda: ["spmv"])
    precisions: list = field(default_factory=list)
    modes: list = field(default_factory=lambda: [MatrixMode.PURE])
    threads: list = field(default_factory=lambda: [1])
    lanes: list = field(default_factory=lambda: [False, True])
    reps: int = MIN_SUITE_REPS
    solvers: SolverPlan | None = None
    cache_dir: str | None = None
    offline: bool = False
    output_dir: str = "mpsparse-results"

    @classmethod
    def from_dict(cls, raw: dict, base_dir: Path | None = None) -> "SuiteConfig":
        if not isinstance(raw, dict):
            raise ConfigError("suite configuration must be a mapping")
        known = {"matrices", "kernels", "precisions", "modes", "threads", "lanes", "reps",
                 "solvers", "cache_dir", "offline", "output_dir"}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        try:
            matrices = [str(m) for m in _as_list(raw.get("matrices"))]
            if base_dir is not None:
                matrices = [str(base_dir / m) if (base_dir / m).is_file() else m for m in matrices]
            kernels = [str(k) for k in _as_list(raw.get("kernels", ["spmv"]))]
            for k in kernels:
                if k not in KERNELS:
                    raise ConfigError(f"unknown kernel {k!r}; expected one of {KERNELS}")
            precisions = [Precision.parse(str(p)) for p in _as_list(raw.get("precisions", ["dd"]))]
            modes = [MatrixMode.parse(m) for m in _as_list(raw.get("modes", ["p"]))]
            threads = [int(t) for t in _as_list(raw.get("threads", [1]))]
            if any(t < 1 for t in threads):
                raise ConfigError("thread counts must be at least 1")
            lanes = [_as_bool(x) for x in _as_list(raw.get("lanes", [False, True]))]
            reps = int(raw.get("reps", MIN_SUITE_REPS))
            if reps < MIN_SUITE_REPS:
                raise ConfigError(f"reps must be at least {MIN_SUITE_REPS}")
            solvers = None
            if raw.get("solvers"):
                s = raw["solvers"]
                if not isinstance(s, dict):
                    raise ConfigError("'solvers' must be a mapping")
                solvers = SolverPlan(
                    methods=[Method.parse(m) for m in _as_list(s.get("methods"))],
                    precisions=[Precision.parse(str(p)) for p in _as_list(s.get("precisions", ["dd"]))],
                    mode=MatrixMode.parse(s.get("mode", "p")),
                    rel_tol=float(s.get("rtol", 1e-13)), abs_tol=float(s.get("atol", 1e-99)),
                    max_iters=int(s.get("max_iters", 10000)), threads=int(s.get("threads", 1)))
                if not solvers.methods:
                    raise ConfigError("'solvers.methods' is empty")
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc
        for p in precisions:
            for m in modes:
                if m is MatrixMode.MIXED and p.components == 1:
                    raise ConfigError(f"mixed mode is not defined for {p}")
        return cls(matrices=matrices, kernels=kernels, precisions=precisions, modes=modes,
                   threads=threads, lanes=lanes, reps=reps, solvers=solvers,
                   cache_dir=raw.get("cache_dir"), offline=_as_bool(raw.get("offline", False)),
                   output_dir=str(raw.get("output_dir", "mpsparse-results")))

    @classmethod
    def load(cls, path) -> "SuiteConfig":
        """Read a YAML or JSON file (JSON is valid YAML)."""
        path = Path(path)
        try:
            raw = yaml.safe_load(path.read_text())
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        return cls.from_dict(raw or {}, base_dir=path.parent)

    def kernel_modes(self):
        """Baseline first, then every accelerated combination."""
        seen = []
        for p in self.precisions:
            for m in self.modes:
                combos = [(1, False)] + [(t, ln) for t in self.threads for ln in self.lanes]
                for t, ln in combos:
                    mode = KernelMode(p, m, threads=t, lanes_enabled=ln)
                    if mode not in seen:
                        seen.append(mode)
        return seen


@dataclass
class SuiteResult:
    records: list
    summaries: list
    solver_reports: list
    failures: dict
    paths: dict

    @property
    def exit_code(self) -> int:
        attempted = len(self.failures) + len({r.matrix_name for r in self.records}
                                             | {s["matrix"] for s in self.solver_reports})
        return 1 if attempted and len(self.failures) == attempted else 0


def matrix_label(name: str) -> str:
    base = os.path.basename(name)
    for suffix in (".gz", ".mtx"):
        if base.endswith(suffix):
            base = base[: -len(suffix)]
    return base


def rhs_for(A, precision: Precision):
    """Return ``(b, v)`` with ``b = A v`` for the benchmark vector ``v``."""
    v = make_vector(A.ncols, "real", precision)
    return spmv(A, v, KernelMode(precision)), v


def write_history(path: Path, history: list, b_norm: float) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "residual_norm", "relative_residual"])
        for i, r in enumerate(history):
            w.writerow([i, repr(r), repr(r / b_norm if b_norm else r)])


def run_solvers(A, name: str, plan: SolverPlan, out_dir: Path) -> list[dict]:
    results = []
    if isinstance(A, ComplexSparseMatrix):
        raise TypeError("solvers take real matrices")
    for prec in plan.precisions:
        b, _ = rhs_for(A, prec)
        for method in plan.methods:
            cfg = SolverConfig(method=method, precision=prec, matrix_mode=plan.mode,
                               rel_tol=plan.rel_tol, abs_tol=plan.abs_tol,
                               max_iters=plan.max_iters, threads=plan.threads)
            _, report = solve(A, b, cfg)
            hist = out_dir / f"history_{name}_{method.value}_{prec}.csv".replace(":", "-")
            write_history(hist, report.residual_history, report.b_norm)
            entry = {"schema_version": SCHEMA_VERSION, "matrix": name, "n": A.nrows,
                     "nnz": A.nnz, "mode": plan.mode.value, **report.as_dict(),
                     "history_file": hist.name}
            log.info("%s %s %s: %s after %d iterations", name, method.value, prec,
                     report.status, report.iterations)
            results.append(entry)
    return results


def run_suite(config, output_dir=None, *, transport=None) -> SuiteResult:
    """Run a suite and write its reports.

    Writes ``records.jsonl``, ``summary.csv`` and, with solvers configured,
    ``solvers.jsonl`` plus one ``history_*.csv`` per run.  A failing matrix
    is logged and skipped.
    """
    if not isinstance(config, SuiteConfig):
        config = SuiteConfig.load(config) if isinstance(config, (str, os.PathLike)) \
            else SuiteConfig.from_dict(config)
    out_dir = Path(output_dir or config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records: list[BenchRecord] = []
    solver_reports: list[dict] = []
    failures: dict[str, str] = {}
    modes = config.kernel_modes()
    for name in config.matrices:
        label = matrix_label(name)
        try:
            path = fetch_matrix(name, config.cache_dir, offline=config.offline,
                                transport=transport)
            A = load_mtx(path, require_square=True)
            for kernel in config.kernels:
                for mode in modes:
                    rec = time_kernel(A, kernel, mode, config.reps, name=label)
                    log.info("%s %s %s/%s threads=%d lanes=%s: %.3e s", label, rec.kernel,
                             rec.precision, rec.mode, rec.threads, rec.lanes_enabled,
                             rec.median_time_seconds)
                    records.append(rec)
            if config.solvers is not None and not isinstance(A, ComplexSparseMatrix):
                solver_reports.extend(run_solvers(A, label, config.solvers, out_dir))
        except Exception as exc:  # noqa: BLE001 - one bad matrix must not stop the suite
            log.error("%s: %s: %s", name, type(exc).__name__, exc)
            failures[label] = f"{type(exc).__name__}: {exc}"
    summaries = summarize(records)
    paths = {"records": write_records(records, out_dir / "records.jsonl"),
             "summary": write_summary(summaries, out_dir / "summary.csv")}
    if config.solvers is not None:
        paths["solvers"] = out_dir / "solvers.jsonl"
        with paths["solvers"].open("w") as fh:
            for entry in solver_reports:
                fh.write(json.dumps(entry) + "\n")
    return SuiteResult(records, summaries, solver_reports, failures, paths)
