import io
import json
import tarfile

import gmpy2
import numpy as np
import pytest
from gmpy2 import mpc, mpq

from mpsparse.bench import (BenchRecord, ConfigError, IntegrityError, NetworkError,
                            OfflineError, SuiteConfig, UnknownMatrixError,
                            fetch_matrix, make_vector, read_records, read_summary, resolve,
                            run_suite, size_bucket, speedup_ratio, summarize, time_kernel)
from mpsparse.bench.cli import main
from mpsparse.kernels import KernelMode
from mpsparse.mpfloat import DD, F64, QD, TD, Precision
from mpsparse.sparsemat import csr_from_dense, load_mtx, write_mtx
from oracle import exact, oracle_context

EXAMPLE = np.array([[1, 0, 2, 0, 0],
                    [0, 3, 0, 0, -4],
                    [0, 0, 5, 0, 0],
                    [6, 0, 0, -7, 0],
                    [0, 0, 0, 0, 8]], dtype=float)
EXAMPLE_MTX = ("%%MatrixMarket matrix coordinate real general\n5 5 8\n"
               "1 1 1\n1 3 2\n2 2 3\n2 5 -4\n3 3 5\n4 1 6\n4 4 -7\n5 5 8\n")


def tarball(name: str, text: str, member: str | None = None) -> bytes:
    buf = io.BytesIO()
    with tarfile.open(fileobj=buf, mode="w:gz") as tar:
        data = text.encode()
        info = tarfile.TarInfo(member or f"{name}/{name}.mtx")
        info.size = len(data)
        tar.addfile(info, io.BytesIO(data))
    return buf.getvalue()


class StubTransport:
    def __init__(self, payload=None, error=None):
        self.payload = payload
        self.error = error
        self.urls = []

    def __call__(self, url):
        self.urls.append(url)
        if self.error:
            raise self.error
        return self.payload


def record(n=500, threads=1, lanes=False, t=1.0, name="m", kernel="spmv", precision="dd"):
    return BenchRecord(matrix_name=name, n=n, nnz=4 * n, kernel=kernel, precision=precision,
                       mode="p", threads=threads, lanes_enabled=lanes,
                       median_time_seconds=t, repetitions=5)


class TestFetch:
    def test_download_extract_and_cache(self, tmp_path):
        stub = StubTransport(tarball("toy", EXAMPLE_MTX))
        path = fetch_matrix("Group/toy", tmp_path, transport=stub)
        assert stub.urls == ["https://sparse.tamu.edu/MM/Group/toy.tar.gz"]
        np.testing.assert_array_equal(load_mtx(path).to_dense(), EXAMPLE)
        assert path.with_suffix(".mtx.sha256").is_file()
        again = fetch_matrix("Group/toy", tmp_path, transport=stub)
        assert again == path and len(stub.urls) == 1

    def test_known_name_resolves_group(self, tmp_path):
        assert resolve("tub1000") == ("Bai", "tub1000")
        assert resolve("nd3k") == ("ND", "nd3k")
        assert resolve("qc324") == ("Bai", "qc324")
        stub = StubTransport(tarball("tub1000", EXAMPLE_MTX))
        fetch_matrix("tub1000", tmp_path, transport=stub)
        assert stub.urls[0].endswith("/Bai/tub1000.tar.gz")

    def test_url_template(self, tmp_path):
        stub = StubTransport(tarball("toy", EXAMPLE_MTX))
        fetch_matrix("G/toy", tmp_path, transport=stub, url_template="file:///m/{group}-{name}.tgz")
        assert stub.urls == ["file:///m/G-toy.tgz"]

    def test_cache_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("MPSPARSE_CACHE", str(tmp_path))
        path = fetch_matrix("G/toy", transport=StubTransport(tarball("toy", EXAMPLE_MTX)))
        assert path.parent.parent == tmp_path

    def test_local_path_passthrough(self, tmp_path):
        p = tmp_path / "a.mtx"
        p.write_text(EXAMPLE_MTX)
        stub = StubTransport()
        assert fetch_matrix(str(p), tmp_path, transport=stub) == p
        assert stub.urls == []

    def test_offline_requires_cache(self, tmp_path):
        with pytest.raises(OfflineError):
            fetch_matrix("G/toy", tmp_path, offline=True, transport=StubTransport())
        fetch_matrix("G/toy", tmp_path, transport=StubTransport(tarball("toy", EXAMPLE_MTX)))
        assert fetch_matrix("G/toy", tmp_path, offline=True).is_file()

    def test_unknown_name(self, tmp_path):
        with pytest.raises(UnknownMatrixError):
            fetch_matrix("definitely_not_a_matrix", tmp_path, transport=StubTransport())

    def test_network_error_propagates(self, tmp_path):
        stub = StubTransport(error=NetworkError("down"))
        with pytest.raises(NetworkError):
            fetch_matrix("G/toy", tmp_path, transport=stub)
        assert not (tmp_path / "G" / "toy.mtx").exists()

    @pytest.mark.parametrize("payload", [b"not a tarball", None])
    def test_corrupt_archive(self, tmp_path, payload):
        payload = payload if payload is not None else tarball("other", EXAMPLE_MTX)
        with pytest.raises(IntegrityError):
            fetch_matrix("G/toy", tmp_path, transport=StubTransport(payload))

    def test_expected_checksum(self, tmp_path):
        with pytest.raises(IntegrityError):
            fetch_matrix("G/toy", tmp_path, transport=StubTransport(tarball("toy", EXAMPLE_MTX)),
                         expected_sha256="0" * 64)

    def test_tampered_cache_detected(self, tmp_path):
        path = fetch_matrix("G/toy", tmp_path, transport=StubTransport(tarball("toy", EXAMPLE_MTX)))
        path.write_text(EXAMPLE_MTX.replace("-7", "-8"))
        with pytest.raises(IntegrityError):
            fetch_matrix("G/toy", tmp_path, transport=StubTransport())

    def test_index_file_resolves_unknown_names(self, tmp_path):
        (tmp_path / "ssstats.csv").write_text("2\n2024-01-01\nHB,foo,1,1,1\nBar,baz,1,1,1\n")
        assert resolve("baz", tmp_path) == ("Bar", "baz")


class TestMakeVector:
    @pytest.mark.parametrize("prec", [F64, DD, TD, QD, Precision.mpfr(300)], ids=str)
    def test_real(self, prec):
        v = make_vector(3, "real", prec)
        with oracle_context(600):
            root2 = gmpy2.sqrt(gmpy2.mpfr(2))
            for j in range(3):
                want = root2 * (j + 1)
                got = mpq(v.data[j]) if prec.is_bigfloat else exact(v.components[:, j])
                assert abs(got - mpq(want)) <= abs(mpq(want)) * mpq(2) ** -(prec.mantissa_bits)

    def test_complex_principal_root(self):
        v = make_vector(1, "complex", QD)
        assert float(v.re.leading()[0]) == pytest.approx(1.6741, abs=1e-4)
        assert float(v.im.leading()[0]) == pytest.approx(0.8960, abs=1e-4)
        with oracle_context(600):
            ref = gmpy2.sqrt(mpc(2, 3))
        assert abs(exact(v.re.components[:, 0]) - mpq(ref.real)) < mpq(2) ** -210
        assert abs(exact(v.im.components[:, 0]) - mpq(ref.imag)) < mpq(2) ** -210

    def test_exact_multiples_before_rounding(self):
        v = make_vector(2, "real", F64)
        assert v.data[1] == 2 * v.data[0]

    @pytest.mark.parametrize("prec", [DD, QD], ids=str)
    def test_deterministic(self, prec):
        assert make_vector(100, "complex", prec).bit_equal(make_vector(100, "complex", prec))

    @pytest.mark.parametrize("args", [(0, "real"), (3, "imaginary")])
    def test_invalid(self, args):
        with pytest.raises(ValueError):
            make_vector(*args)


class TestTiming:
    def test_example_record(self):
        rec = time_kernel(csr_from_dense(EXAMPLE), "spmv", KernelMode(DD), reps=5, name="example")
        assert (rec.n, rec.nnz, rec.kernel, rec.precision, rec.mode) == (5, 8, "spmv", "dd", "p")
        assert rec.repetitions == 5 and len(rec.times) == 5
        assert rec.median_time_seconds == sorted(rec.times)[2]

    def test_single_rep_median(self):
        rec = time_kernel(csr_from_dense(EXAMPLE), "sptmv", KernelMode(TD, "m"), reps=1)
        assert rec.median_time_seconds == rec.times[0]

    def test_same_config_differs_only_in_time(self):
        A = csr_from_dense(EXAMPLE)
        a = time_kernel(A, "spmv", KernelMode(QD, threads=2), reps=5)
        b = time_kernel(A, "spmv", KernelMode(QD, threads=2), reps=5)
        da, db = a.to_json(), b.to_json()
        for key in ("median_time_seconds", "times"):
            da.pop(key), db.pop(key)
        assert da == db

    def test_checksum_stable_across_threads(self):
        rng = np.random.default_rng(0)
        A = csr_from_dense(rng.standard_normal((200, 200)) * (rng.random((200, 200)) < 0.05))
        sums = {time_kernel(A, "spmv", KernelMode(DD, threads=t), reps=1).checksum
                for t in (1, 2, 4, 8)}
        assert len(sums) == 1

    def test_complex_matrix_switches_kernel(self):
        rec = time_kernel(csr_from_dense(1j * np.eye(3)), "spmv", KernelMode(DD), reps=1)
        assert rec.kernel == "spmv_complex"

    def test_json_round_trip(self):
        rec = time_kernel(csr_from_dense(EXAMPLE), "spmv", KernelMode(DD), reps=5)
        assert BenchRecord.from_json(json.loads(json.dumps(rec.to_json()))) == rec

    @pytest.mark.parametrize("kw", [dict(kernel="spmm"), dict(t=0.0)])
    def test_record_validation(self, kw):
        with pytest.raises(ValueError):
            record(**kw)


class TestSpeedup:
    def test_equal_times(self):
        assert speedup_ratio(record(t=1.0), record(threads=4, t=1.0)) == 1.0

    def test_four_times_faster(self):
        assert speedup_ratio(record(t=2.0), record(threads=8, t=0.5)) == 4.0

    def test_self_ratio(self):
        r = record(t=0.3)
        assert speedup_ratio(r, r) == 1.0

    def test_mismatched_configs(self):
        with pytest.raises(ValueError):
            speedup_ratio(record(), record(precision="qd"))

    @pytest.mark.parametrize("n,bucket", [(100, None), (101, "101-1000"), (1000, "101-1000"),
                                          (1001, "1001-5000"), (10000, "5001-10000"),
                                          (10001, None)])
    def test_size_bucket(self, n, bucket):
        assert size_bucket(n) == bucket


class TestSummarize:
    def rows(self, records):
        return {(s.size_bucket, s.threads): s for s in summarize(records)}

    def test_single_matrix(self):
        s = self.rows([record(t=2.0), record(threads=2, t=1.0)])[("101-1000", 2)]
        assert (s.matrix_count, s.pct_speedup_gt_1, s.mean_speedup) == (1, 100.0, 2.0)

    def test_mixed_ratios(self):
        recs = [record(name="a", t=1.0), record(name="a", threads=4, t=2.0),
                record(name="b", t=2.0), record(name="b", threads=4, t=1.0)]
        s = self.rows(recs)[("101-1000", 4)]
        assert (s.matrix_count, s.pct_speedup_gt_1, s.mean_speedup) == (2, 50.0, 1.25)

    def test_empty_buckets_marked(self):
        rows = self.rows([record(t=2.0), record(threads=2, t=1.0)])
        for bucket in ("1001-5000", "5001-10000"):
            s = rows[(bucket, 2)]
            assert s.matrix_count == 0 and s.pct_speedup_gt_1 is None and s.mean_speedup is None

    def test_lanes_only_configuration(self):
        rows = summarize([record(t=3.0), record(lanes=True, t=1.0)])
        assert rows[0].lanes_enabled and rows[0].mean_speedup == 3.0

    def test_csv_round_trip(self, tmp_path):
        from mpsparse.bench import write_summary
        recs = [record(name=str(i), n=n, t=1.0 + i) for i, n in enumerate((200, 2000, 7000))]
        recs += [record(name=str(i), n=n, threads=2, t=0.7 + 0.1 * i / 3)
                 for i, n in enumerate((200, 2000, 7000))]
        summary = summarize(recs)
        write_summary(summary, tmp_path / "s.csv")
        assert read_summary(tmp_path / "s.csv") == summary
        assert all(0 <= s.pct_speedup_gt_1 <= 100 for s in summary if s.matrix_count)


def write_matrices(directory, count=5, n=120):
    rng = np.random.default_rng(0)
    names = []
    for i in range(count):
        d = rng.standard_normal((n, n)) * (rng.random((n, n)) < 0.05)
        d += np.diag(np.abs(d).sum(axis=1) + 1.0)
        write_mtx(csr_from_dense(d), directory / f"m{i}.mtx")
        names.append(f"m{i}.mtx")
    return names


@pytest.mark.slow
class TestSuite:
    def test_records_summary_and_reconstruction(self, tmp_path):
        names = write_matrices(tmp_path)
        cfg = {"matrices": names, "kernels": ["spmv", "sptmv"], "precisions": ["dd", "qd"],
               "modes": ["p", "m"], "threads": [1, 2], "lanes": ["off", "on"], "reps": 5,
               "solvers": {"methods": ["bicgstab", "cg"], "precisions": ["dd"]}}
        (tmp_path / "suite.yaml").write_text(json.dumps(cfg))
        result = run_suite(tmp_path / "suite.yaml", tmp_path / "out")
        assert result.exit_code == 0 and not result.failures
        records = read_records(result.paths["records"])
        assert records == result.records
        assert {r.matrix_name for r in records} == {f"m{i}" for i in range(5)}
        # 2 kernels x 2 precisions x 2 modes x 4 thread/lane settings
        assert len(records) == 5 * 2 * 2 * 2 * 4
        assert summarize(records) == read_summary(result.paths["summary"])
        assert summarize(records) == result.summaries
        solver_lines = result.paths["solvers"].read_text().splitlines()
        assert len(solver_lines) == 5 * 2
        entry = json.loads(solver_lines[0])
        assert entry["converged"] and (tmp_path / "out" / entry["history_file"]).is_file()

    def test_empty_matrix_list(self, tmp_path):
        result = run_suite({"matrices": []}, tmp_path)
        assert result.exit_code == 0 and result.records == [] and result.summaries == []
        assert (tmp_path / "records.jsonl").read_text() == ""

    def test_partial_failure_is_skipped(self, tmp_path):
        names = write_matrices(tmp_path, count=1, n=40)
        result = run_suite({"matrices": [str(tmp_path / names[0]), "G/missing"],
                            "cache_dir": str(tmp_path / "cache"), "offline": True}, tmp_path)
        assert set(result.failures) == {"missing"} and result.exit_code == 0

    def test_all_failing(self, tmp_path):
        result = run_suite({"matrices": ["G/a", "G/b"], "cache_dir": str(tmp_path),
                            "offline": True}, tmp_path)
        assert result.exit_code == 1 and len(result.failures) == 2


class TestConfig:
    @pytest.mark.parametrize("raw", [
        {"matrices": [], "solvers": {"methods": ["gmres"]}},
        {"matrices": [], "kernels": ["spmm"]},
        {"matrices": [], "precisions": ["hd"]},
        {"matrices": [], "reps": 3},
        {"matrices": [], "precisions": ["f64"], "modes": ["m"]},
        {"matrices": [], "threads": [0]},
        {"matrices": [], "colour": "blue"},
    ])
    def test_rejected_before_running(self, raw):
        with pytest.raises(ConfigError):
            SuiteConfig.from_dict(raw)

    def test_baseline_always_included(self):
        cfg = SuiteConfig.from_dict({"matrices": [], "threads": [4], "lanes": ["on"]})
        settings = [(m.threads, m.lanes_enabled) for m in cfg.kernel_modes()]
        assert settings == [(1, False), (4, True)]


class TestCli:
    def test_spmv(self, tmp_path, capsys):
        (tmp_path / "e.mtx").write_text(EXAMPLE_MTX)
        rc = main(["spmv", str(tmp_path / "e.mtx"), "--precision", "qd", "--mode", "m",
                   "--threads", "2", "--lanes", "off", "--transposed", "--reps", "5"])
        out = json.loads(capsys.readouterr().out)
        assert rc == 0
        assert (out["kernel"], out["precision"], out["mode"], out["n"], out["nnz"]) == \
            ("sptmv", "qd", "m", 5, 8)
        assert out["threads"] == 2 and out["lanes_enabled"] is False

    def test_solve(self, tmp_path, capsys):
        write_matrices(tmp_path, count=1, n=60)
        rc = main(["solve", str(tmp_path / "m0.mtx"), "--method", "gpbicg", "--precision", "td",
                   "--history", str(tmp_path / "h.csv")])
        out = json.loads(capsys.readouterr().out)
        assert rc == 0 and out["converged"] and out["matrix"] == "m0"
        lines = (tmp_path / "h.csv").read_text().splitlines()
        assert len(lines) == out["iterations"] + 2

    def test_fetch_offline_error(self, tmp_path, capsys):
        rc = main(["fetch", "tub1000", "--cache-dir", str(tmp_path), "--offline"])
        assert rc == 2 and "OfflineError" in capsys.readouterr().err

    def test_fetch_local(self, tmp_path, capsys):
        (tmp_path / "e.mtx").write_text(EXAMPLE_MTX)
        assert main(["fetch", str(tmp_path / "e.mtx")]) == 0
        assert json.loads(capsys.readouterr().out)["nnz"] == 8

    def test_bad_precision(self, capsys):
        with pytest.raises(SystemExit):
            main(["spmv", "x.mtx", "--precision", "hd"])

    def test_suite(self, tmp_path, capsys):
        names = write_matrices(tmp_path, count=2, n=30)
        (tmp_path / "s.yaml").write_text(f"matrices: {names}\nprecisions: [dd]\nthreads: [2]\n")
        rc = main(["suite", str(tmp_path / "s.yaml"), "--output-dir", str(tmp_path / "o")])
        assert rc == 0 and (tmp_path / "o" / "summary.csv").is_file()
