"""Benchmark harness: matrix fetching, test vectors, timing and reports."""

from .fetch import (COMPLEX_SET, DEFAULT_URL_TEMPLATE, KNOWN_GROUPS, FetchError,
                    IntegrityError, NetworkError, OfflineError, UnknownMatrixError,
                    fetch_matrix, resolve)
from .records import (SIZE_BUCKETS, BenchRecord, SpeedupSummary, read_records,
                      read_summary, size_bucket, speedup_ratio, summarize, time_kernel,
                      write_records, write_summary)
from .suite import ConfigError, SuiteConfig, SuiteResult, rhs_for, run_suite
from .vectors import make_vector
