"""Kernel timing records, speedup ratios and bucketed summaries."""

from __future__ import annotations

import csv
import json
import statistics
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from ..kernels.spmv import KernelMode, prepare_matrix, spmv, spmv_complex, sptmv, sptmv_complex
from ..sparsemat.formats import ComplexSparseMatrix
from .vectors import make_vector

SCHEMA_VERSION = 1
KERNELS = ("spmv", "sptmv", "spmv_complex", "sptmv_complex")
SIZE_BUCKETS = ((101, 1000), (1001, 5000), (5001, 10000))
NA = "NA"

_KERNEL_FUNCS = {"spmv": spmv, "sptmv": sptmv, "spmv_complex": spmv_complex,
                 "sptmv_complex": sptmv_complex}


@dataclass(frozen=True)
class BenchRecord:
    """One timed kernel configuration on one matrix."""

    matrix_name: str
    n: int
    nnz: int
    kernel: str
    precision: str
    mode: str
    threads: int
    lanes_enabled: bool
    median_time_seconds: float
    repetitions: int
    times: tuple = field(default=(), compare=False)
    checksum: str = ""

    def __post_init__(self):
        if self.kernel not in KERNELS:
            raise ValueError(f"unknown kernel {self.kernel!r}")
        if not self.median_time_seconds > 0:
            raise ValueError("median_time_seconds must be positive")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")

    def config_key(self) -> tuple:
        """Identity of the measured computation, ignoring threads and lanes."""
        return (self.matrix_name, self.n, self.nnz, self.kernel, self.precision, self.mode)

    def to_json(self) -> dict:
        d = asdict(self)
        d["times"] = list(self.times)
        return {"schema_version": SCHEMA_VERSION, **d}

    @classmethod
    def from_json(cls, obj: dict) -> "BenchRecord":
        names = {f.name for f in fields(cls)}
        d = {k: v for k, v in obj.items() if k in names}
        d["times"] = tuple(d.get("times", ()))
        return cls(**d)


def _kernel_name(matrix, kernel: str) -> str:
    complex_ = isinstance(matrix, ComplexSparseMatrix)
    if kernel.endswith("_complex") != complex_:
        base = kernel.replace("_complex", "")
        kernel = f"{base}_complex" if complex_ else base
    return kernel


def _prepare(matrix, mode: KernelMode):
    if isinstance(matrix, ComplexSparseMatrix):
        return ComplexSparseMatrix(prepare_matrix(matrix.re, mode), prepare_matrix(matrix.im, mode))
    return prepare_matrix(matrix, mode)


def time_kernel(matrix, kernel: str, mode: KernelMode, reps: int = 5, *, vector=None,
                name: str = "matrix") -> BenchRecord:
    """Time ``kernel`` on ``matrix`` and return a :class:`BenchRecord`.

    The matrix is converted to the storage precision once, outside the
    timed region.  One warm-up call is excluded; the recorded time is the
    median of ``reps`` calls measured with ``time.perf_counter``.  A hash of
    the output is stored so the work cannot be optimized away and so runs
    can be compared bit for bit.

    ``kernel`` is adjusted to the complex variant for complex matrices.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    kernel = _kernel_name(matrix, kernel)
    func = _KERNEL_FUNCS[kernel]
    A = _prepare(matrix, mode)
    if vector is None:
        length = A.nrows if kernel.startswith("sptmv") else A.ncols
        vector = make_vector(length, "complex" if kernel.endswith("_complex") else "real",
                             mode.precision)
    func(A, vector, mode)
    times = []
    y = None
    for _ in range(reps):
        t0 = time.perf_counter()
        y = func(A, vector, mode)
        times.append(max(time.perf_counter() - t0, 1e-9))
    return BenchRecord(
        matrix_name=name, n=A.nrows, nnz=A.nnz, kernel=kernel, precision=str(mode.precision),
        mode=mode.matrix_precision.value, threads=mode.threads, lanes_enabled=mode.lanes_enabled,
        median_time_seconds=float(statistics.median(times)), repetitions=reps,
        times=tuple(times), checksum=y.checksum(),
    )


def speedup_ratio(single: BenchRecord, multi: BenchRecord) -> float:
    """``single.median / multi.median``; values above 1 mean ``multi`` is faster.

    Raises
    ------
    ValueError
        If the records measure different computations (anything besides
        threads and lanes differs).
    """
    if single.config_key() != multi.config_key():
        raise ValueError(f"records are not comparable: {single.config_key()} vs {multi.config_key()}")
    return single.median_time_seconds / multi.median_time_seconds


def size_bucket(n: int) -> str | None:
    for lo, hi in SIZE_BUCKETS:
        if lo <= n <= hi:
            return f"{lo}-{hi}"
    return None


@dataclass(frozen=True)
class SpeedupSummary:
    """Speedups of one accelerated configuration within one size bucket.

    ``pct_speedup_gt_1`` and ``mean_speedup`` are ``None`` for an empty
    bucket.
    """

    size_bucket: str
    kernel: str
    precision: str
    mode: str
    threads: int
    lanes_enabled: bool
    matrix_count: int
    pct_speedup_gt_1: float | None
    mean_speedup: float | None


def _is_baseline(r: BenchRecord) -> bool:
    return r.threads == 1 and not r.lanes_enabled


def summarize(records) -> list[SpeedupSummary]:
    """Bucket speedups over the baseline (1 thread, lanes off).

    For every accelerated (kernel, precision, mode, threads, lanes)
    configuration all three size buckets are emitted, empty ones with count
    0.  Matrices without a baseline record, or outside every bucket, are
    ignored.
    """
    records = list(records)
    baselines = {r.config_key(): r for r in records if _is_baseline(r)}
    groups: dict[tuple, dict[str, list[float]]] = {}
    for r in records:
        if _is_baseline(r):
            continue
        gkey = (r.kernel, r.precision, r.mode, r.threads, r.lanes_enabled)
        buckets = groups.setdefault(gkey, {})
        base = baselines.get(r.config_key())
        bucket = size_bucket(r.n)
        if base is None or bucket is None:
            continue
        buckets.setdefault(bucket, []).append(speedup_ratio(base, r))
    out = []
    for gkey in sorted(groups):
        kernel, precision, mode, threads, lanes = gkey
        for lo, hi in SIZE_BUCKETS:
            label = f"{lo}-{hi}"
            ratios = groups[gkey].get(label, [])
            if ratios:
                pct = 100.0 * sum(1 for x in ratios if x > 1.0) / len(ratios)
                mean = sum(ratios) / len(ratios)
            else:
                pct = mean = None
            out.append(SpeedupSummary(label, kernel, precision, mode, threads, lanes,
                                      len(ratios), pct, mean))
    return out


SUMMARY_COLUMNS = ["schema_version"] + [f.name for f in fields(SpeedupSummary)]


def write_records(records, path) -> Path:
    path = Path(path)
    with path.open("w") as fh:
        for r in records:
            fh.write(json.dumps(r.to_json()) + "\n")
    return path


def read_records(path) -> list[BenchRecord]:
    with Path(path).open() as fh:
        return [BenchRecord.from_json(json.loads(line)) for line in fh if line.strip()]


def _cell(value) -> str:
    if value is None:
        return NA
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_summary(summaries, path) -> Path:
    """Write summaries as CSV; floats use ``repr`` so they read back exactly."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_COLUMNS)
        for s in summaries:
            w.writerow([SCHEMA_VERSION] + [_cell(getattr(s, c)) for c in SUMMARY_COLUMNS[1:]])
    return path


def read_summary(path) -> list[SpeedupSummary]:
    out = []
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            def opt(key):
                return None if row[key] == NA else float(row[key])
            out.append(SpeedupSummary(
                size_bucket=row["size_bucket"], kernel=row["kernel"], precision=row["precision"],
                mode=row["mode"], threads=int(row["threads"]),
                lanes_enabled=row["lanes_enabled"] == "True", matrix_count=int(row["matrix_count"]),
                pct_speedup_gt_1=opt("pct_speedup_gt_1"), mean_speedup=opt("mean_speedup")))
    return out
