import io

import numpy as np
import pytest

from cosbound import BenchConfig, BoundKind, format_report, lower_bound, run_bench, write_bench_csv
from cosbound.bench import SUBJECTS, _one_pass


TINY = BenchConfig(array_size=4096, warmup_iters=1, measure_iters=3, iter_duration_target=1e-9)


@pytest.fixture(scope="module")
def tiny_report():
    return run_bench(TINY)


class TestConfig:
    def test_rejects_bad_sizes(self):
        with pytest.raises(ValueError):
            BenchConfig(array_size=0)
        with pytest.raises(ValueError):
            BenchConfig(measure_iters=0)
        with pytest.raises(ValueError):
            BenchConfig(warmup_iters=-1)
        with pytest.raises(ValueError):
            BenchConfig(iter_duration_target=-0.5)
        with pytest.raises(ValueError):
            BenchConfig(iter_duration_target=0.0)

    def test_defaults(self):
        cfg = BenchConfig()
        assert cfg.array_size == 2_000_000
        assert cfg.measure_iters == 10


class TestKernels:
    def test_kernels_match_library_formulas(self):
        # the timed code path must compute the exact same floats as lower_bound
        rng = np.random.default_rng(0)
        n = 40000  # spans multiple chunks plus a ragged tail
        a = rng.uniform(-1.0, 1.0, n)
        b = rng.uniform(-1.0, 1.0, n)
        scratch = [np.empty(16384) for _ in range(3)]
        for name, kernel, _ in SUBJECTS:
            if name == "baseline":
                continue
            kind = BoundKind(name)
            want = lower_bound(kind, a, b)
            got = np.empty(n)
            for start in range(0, n, 16384):
                end = min(start + 16384, n)
                views = [s[: end - start] for s in scratch]
                got[start:end] = kernel(a[start:end], b[start:end], views)
            assert np.array_equal(got, want), name

    def test_baseline_is_single_vector_op(self):
        # the memory-bandwidth floor: one elementwise add, nothing else
        a = np.array([0.5, -0.25])
        b = np.array([0.5, 0.8])
        scratch = [np.empty(2) for _ in range(3)]
        name, kernel, _ = SUBJECTS[-1]
        assert name == "baseline"
        assert kernel(a, b, scratch).tolist() == [1.0, 0.55]

    def test_one_pass_checksum_deterministic(self):
        rng = np.random.default_rng(1)
        a = rng.uniform(-1.0, 1.0, 20000)
        b = rng.uniform(-1.0, 1.0, 20000)
        scratch = [np.empty(16384) for _ in range(3)]
        _, kernel, _ = SUBJECTS[3]
        assert _one_pass(kernel, a, b, scratch) == _one_pass(kernel, a, b, scratch)


class TestRunBench:
    def test_all_subjects_present_in_order(self, tiny_report):
        assert [r.subject for r in tiny_report.results] == [name for name, _, _ in SUBJECTS]

    def test_times_are_positive(self, tiny_report):
        for r in tiny_report.results:
            assert r.mean_ns > 0.0
            assert r.stddev_ns >= 0.0

    def test_checksums_reproducible_across_runs(self, tiny_report):
        again = run_bench(TINY)
        for r1, r2 in zip(tiny_report.results, again.results):
            assert r1.subject == r2.subject
            assert r1.checksum == r2.checksum

    def test_accuracy_labels(self, tiny_report):
        labels = {r.subject: r.accuracy for r in tiny_report.results}
        assert labels["euclidean"] == "o"
        assert labels["arccos"] == "++"
        assert labels["mult"] == "++"
        assert labels["mult_variant"] == "++"
        assert labels["mult_lb1"] == "-"
        assert labels["eucl_lb"] == "--"
        assert labels["mult_lb2"] == "--"
        assert labels["baseline"] == "n/a"

    def test_notes_mention_inputs_and_environment(self, tiny_report):
        joined = " ".join(tiny_report.notes)
        assert "uniform" in joined
        assert "pinn" in joined  # cpu pinning outcome is always reported
        assert "orderings" in joined

    def test_result_lookup(self, tiny_report):
        assert tiny_report.result("mult").subject == "mult"
        with pytest.raises(KeyError):
            tiny_report.result("nope")


class TestReporting:
    def test_format_report_table(self, tiny_report):
        text = format_report(tiny_report)
        lines = text.splitlines()
        assert lines[0].split() == ["subject", "mean_ns", "stddev_ns", "accuracy", "checksum"]
        assert sum(1 for l in lines if l.startswith("euclidean")) == 1
        assert any(l.startswith("# config:") for l in lines)

    def test_csv_columns_and_precision(self, tiny_report):
        buf = io.StringIO()
        write_bench_csv(buf, tiny_report)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "subject,mean_ns,stddev_ns"
        assert len(lines) == 1 + len(SUBJECTS)
        for line in lines[1:]:
            subject, mean_ns, stddev_ns = line.split(",")
            assert float(mean_ns) > 0.0
            assert float(stddev_ns) >= 0.0
