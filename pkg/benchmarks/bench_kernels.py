"""Benchmark the compiled kernels against the numpy fallback.

Usage::

    python benchmarks/bench_kernels.py

Times each kernel on representative workloads (large single fits plus the
many-small-fits shape the test suite leans on) and prints best-of-N timings
with the speedup of the compiled core over the fallback.
"""

from __future__ import annotations

import time

import numpy as np

from trajsurv._kernels import _pure

try:
    from trajsurv._kernels import _core
except ImportError:
    _core = None


def best_of(fn, repeat: int = 7) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def survival_arrays(rng, n):
    durations = np.sort(np.round(rng.random(n) * 12 * 365.25) / 365.25)
    events = (rng.random(n) < 0.8).astype(np.int64)
    return durations, events


def workloads():
    rng = np.random.default_rng(2)

    for n in (1_000, 20_000, 200_000):
        durations, events = survival_arrays(rng, n)
        yield f"km_counts n={n}", lambda impl, d=durations, e=events: impl.km_counts(d, e)

    small = [survival_arrays(rng, 200) for _ in range(1_000)]

    def many_small(impl):
        for d, e in small:
            impl.km_counts(d, e)

    yield "km_counts 1000 x n=200", many_small

    for n in (20_000, 200_000):
        durations, events = survival_arrays(rng, n)
        groups = rng.integers(0, 4, n).astype(np.int64)
        yield (
            f"logrank_counts n={n} k=4",
            lambda impl, d=durations, e=events, g=groups: impl.logrank_counts(d, e, g, 4),
        )

    starts = np.array([0.0, 1.0, 4.0, 8.0])
    rates = np.array([0.05, 0.2, 0.1, 0.4])
    targets = -np.log(1.0 - rng.random(1_000_000))
    yield "piecewise_inverse 1e6 draws", lambda impl: impl.piecewise_inverse(starts, rates, targets)
    times = rng.random(1_000_000) * 12
    yield "piecewise_cumhaz 1e6 points", lambda impl: impl.piecewise_cumhaz(starts, rates, times)


def main() -> None:
    if _core is None:
        print("compiled kernels are not built; run `pip install -e . --no-build-isolation` first")
        return
    header = f"{'workload':<30} {'pure (ms)':>12} {'compiled (ms)':>14} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, runner in workloads():
        pure_t = best_of(lambda: runner(_pure))
        core_t = best_of(lambda: runner(_core))
        print(f"{name:<30} {pure_t * 1e3:>12.3f} {core_t * 1e3:>14.3f} {pure_t / core_t:>8.1f}x")


if __name__ == "__main__":
    main()
