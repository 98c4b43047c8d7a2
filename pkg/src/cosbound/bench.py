"""Per-pair evaluation cost of each bound formula.

Streams pre-generated similarity pairs through vectorized kernels in
cache-sized chunks with preallocated scratch buffers. Chunking keeps the
closed-form kernels compute-bound instead of memory-bound, which is what a
per-element cost comparison is after; per-call Python dispatch would dwarf
the arithmetic being measured. Absolute ns/op values are machine dependent;
only the relative ordering of subjects is meaningful.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass

import numpy as np

_CHUNK = 16384


@dataclass(frozen=True)
class BenchConfig:
    array_size: int = 2_000_000
    warmup_iters: int = 5
    measure_iters: int = 10
    iter_duration_target: float = 0.25
    seed: int = 42

    def __post_init__(self):
        if self.array_size < 1 or self.warmup_iters < 1 or self.measure_iters < 1:
            raise ValueError("array_size, warmup_iters, and measure_iters must all be >= 1")
        if not (self.iter_duration_target > 0 and math.isfinite(self.iter_duration_target)):
            raise ValueError("iter_duration_target must be a positive duration in seconds")


@dataclass(frozen=True)
class SubjectResult:
    subject: str
    mean_ns: float
    stddev_ns: float
    checksum: float
    accuracy: str


@dataclass(frozen=True)
class BenchReport:
    config: BenchConfig
    results: tuple[SubjectResult, ...]
    notes: tuple[str, ...]
    pinned_cpu: int | None

    def result(self, subject: str) -> SubjectResult:
        for r in self.results:
            if r.subject == subject:
                return r
        raise KeyError(subject)


# Kernels write through three preallocated scratch views and return the array
# holding the final value. Operation order mirrors lower_bound exactly, so a
# kernel's output is bit-identical to the library formula on the same input.


def _k_baseline(a, b, s):
    return np.add(a, b, out=s[0])


def _k_euclidean(a, b, s):
    np.subtract(1.0, a, out=s[0])
    np.subtract(1.0, b, out=s[1])
    np.multiply(s[0], s[1], out=s[0])
    np.sqrt(s[0], out=s[0])
    np.multiply(s[0], 2.0, out=s[0])
    np.add(a, b, out=s[1])
    np.subtract(s[1], 1.0, out=s[1])
    return np.subtract(s[1], s[0], out=s[1])


def _k_eucl_lb(a, b, s):
    np.minimum(a, b, out=s[0])
    np.multiply(s[0], 2.0, out=s[0])
    np.add(a, b, out=s[1])
    np.add(s[1], s[0], out=s[1])
    return np.subtract(s[1], 3.0, out=s[1])


def _k_arccos(a, b, s):
    np.arccos(a, out=s[0])
    np.arccos(b, out=s[1])
    np.add(s[0], s[1], out=s[0])
    return np.cos(s[0], out=s[0])


def _k_mult(a, b, s):
    np.multiply(a, a, out=s[0])
    np.subtract(1.0, s[0], out=s[0])
    np.multiply(b, b, out=s[1])
    np.subtract(1.0, s[1], out=s[1])
    np.multiply(s[0], s[1], out=s[0])
    np.sqrt(s[0], out=s[0])
    np.multiply(a, b, out=s[1])
    return np.subtract(s[1], s[0], out=s[1])


def _k_mult_variant(a, b, s):
    np.add(1.0, a, out=s[0])
    np.subtract(1.0, a, out=s[1])
    np.multiply(s[0], s[1], out=s[0])
    np.add(1.0, b, out=s[1])
    np.subtract(1.0, b, out=s[2])
    np.multiply(s[1], s[2], out=s[1])
    np.multiply(s[0], s[1], out=s[0])
    np.sqrt(s[0], out=s[0])
    np.multiply(a, b, out=s[1])
    return np.subtract(s[1], s[0], out=s[1])


def _k_mult_lb1(a, b, s):
    np.multiply(a, a, out=s[0])
    np.multiply(b, b, out=s[1])
    np.minimum(s[0], s[1], out=s[0])
    np.multiply(a, b, out=s[1])
    np.add(s[1], s[0], out=s[0])
    return np.subtract(s[0], 1.0, out=s[0])


def _k_mult_lb2(a, b, s):
    np.multiply(a, b, out=s[0])
    np.multiply(s[0], 2.0, out=s[0])
    np.subtract(a, b, out=s[1])
    np.abs(s[1], out=s[1])
    np.subtract(s[0], s[1], out=s[0])
    return np.subtract(s[0], 1.0, out=s[0])


# Tightness annotations mirror how close each formula tracks the exact bound:
# ++ exact to float precision, o usable but loose in places, - loose,
# -- loosest. The baseline is a plain add and gets no grade.
SUBJECTS: tuple[tuple[str, object, str], ...] = (
    ("euclidean", _k_euclidean, "o"),
    ("eucl_lb", _k_eucl_lb, "--"),
    ("arccos", _k_arccos, "++"),
    ("mult", _k_mult, "++"),
    ("mult_variant", _k_mult_variant, "++"),
    ("mult_lb1", _k_mult_lb1, "-"),
    ("mult_lb2", _k_mult_lb2, "--"),
    ("baseline", _k_baseline, "n/a"),
)


def _one_pass(kernel, a, b, scratch) -> float:
    """Stream the full arrays through the kernel once; the running sum of each
    chunk's last output defeats any laziness and doubles as a checksum."""
    n = len(a)
    acc = 0.0
    for start in range(0, n, _CHUNK):
        end = min(start + _CHUNK, n)
        width = end - start
        views = scratch if width == _CHUNK else [s[:width] for s in scratch]
        out = kernel(a[start:end], b[start:end], views)
        acc += float(out[-1])
    return acc


def _pin_to_one_cpu() -> tuple[int | None, set | None]:
    try:
        previous = os.sched_getaffinity(0)
        cpu = min(previous)
        os.sched_setaffinity(0, {cpu})
        return cpu, previous
    except (AttributeError, OSError):
        return None, None


def run_bench(config: BenchConfig = BenchConfig()) -> BenchReport:
    """Measure every subject on one shared pair of pre-generated input arrays.

    Per subject: one untimed pass records the checksum, warmup iterations run
    unrecorded, then each measurement iteration times enough full passes to
    fill iter_duration_target and yields one ns/op sample.
    """
    pinned, previous_affinity = _pin_to_one_cpu()
    try:
        rng = np.random.default_rng(config.seed)
        a = rng.uniform(-1.0, 1.0, config.array_size)
        b = rng.uniform(-1.0, 1.0, config.array_size)
        scratch = [np.empty(_CHUNK) for _ in range(3)]
        results = []
        for name, kernel, accuracy in SUBJECTS:
            checksum = _one_pass(kernel, a, b, scratch)
            t0 = time.perf_counter()
            _one_pass(kernel, a, b, scratch)
            per_pass = max(time.perf_counter() - t0, 1e-9)
            reps = max(1, math.ceil(config.iter_duration_target / per_pass))
            for _ in range(config.warmup_iters):
                for _ in range(reps):
                    _one_pass(kernel, a, b, scratch)
            samples = []
            for _ in range(config.measure_iters):
                t0 = time.perf_counter()
                for _ in range(reps):
                    _one_pass(kernel, a, b, scratch)
                elapsed = time.perf_counter() - t0
                samples.append(elapsed / (reps * config.array_size) * 1e9)
            results.append(SubjectResult(
                subject=name,
                mean_ns=float(np.mean(samples)),
                stddev_ns=float(np.std(samples)),
                checksum=checksum,
                accuracy=accuracy,
            ))
    finally:
        if previous_affinity is not None:
            os.sched_setaffinity(0, previous_affinity)
    notes = (
        "absolute ns/op depends on the machine and load; only subject orderings are meaningful",
        "input pairs are drawn uniformly from [-1, 1]",
        "single-threaded measurement; no cpu frequency control is attempted",
        f"cpu pinning: {'pinned to cpu %d during the run' % pinned if pinned is not None else 'unavailable on this platform'}",
        "no platform fast-arccos routine is available; that subject is omitted",
    )
    return BenchReport(config=config, results=tuple(results), notes=notes, pinned_cpu=pinned)


def format_report(report: BenchReport) -> str:
    """Aligned text table plus notes."""
    header = f"{'subject':<14} {'mean_ns':>10} {'stddev_ns':>10} {'accuracy':>8}   checksum"
    lines = [header, "-" * len(header)]
    for r in report.results:
        lines.append(
            f"{r.subject:<14} {r.mean_ns:>10.3f} {r.stddev_ns:>10.3f} {r.accuracy:>8}   {r.checksum!r}"
        )
    lines.append("")
    cfg = report.config
    lines.append(
        f"# config: array_size={cfg.array_size} warmup_iters={cfg.warmup_iters} "
        f"measure_iters={cfg.measure_iters} iter_duration_target={cfg.iter_duration_target} seed={cfg.seed}"
    )
    for note in report.notes:
        lines.append(f"# {note}")
    return "\n".join(lines) + "\n"


def write_bench_csv(target, report: BenchReport) -> None:
    """CSV with columns subject, mean_ns, stddev_ns."""
    from .analysis import _open_for

    f, owned = _open_for(target, "w")
    try:
        f.write("subject,mean_ns,stddev_ns\n")
        for r in report.results:
            f.write(f"{r.subject},{r.mean_ns!r},{r.stddev_ns!r}\n")
    finally:
        if owned:
            f.close()
