"""Compare the numba-compiled kernels with the plain-Python build.

    python3 benchmarks/bench_kernels.py [--records 200000] [--repeat 3]

Both builds run the same hierarchy replay on one synthetic trace; the script
checks that their counters agree and prints throughput and speedup.
"""
import argparse
import statistics
import time

from interplay import kernels
from interplay.configspace import WayConfig
from interplay.simulator import HierarchyParams, PreparedTrace, simulate
from interplay.trace import Region, RegionKind, WorkloadSpec, generate_arrays


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - start)
    return result, min(times), statistics.median(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--records", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    params = HierarchyParams()
    spec = WorkloadSpec(
        args.records,
        (
            Region(RegionKind.HOT_SET, 24 * 1024, 8, 0.3, 3.0),
            Region(RegionKind.SEQUENTIAL_STREAM, 512 * 1024, 64, 0.2, 1.0),
            Region(RegionKind.POINTER_CHASE, 192 * 1024, 64, 0.1, 1.0),
        ),
        code_footprint_bytes=40 * 1024,
        seed=args.seed,
    )
    trace = PreparedTrace(generate_arrays(spec), params.block_bytes)
    cfg = WayConfig(4, 2, 3)

    start = time.perf_counter()
    kernels.warm_up()
    print(f"jit warm-up (compile or cache load): {time.perf_counter() - start:.2f} s")

    rows = []
    for name, jit in (("numba", True), ("python", False)):
        stats, best, median = best_of(lambda: simulate(trace, params, cfg, jit=jit), args.repeat)
        rows.append((name, stats, best, median))
        print(f"{name:>7}: best {best:8.4f} s  median {median:8.4f} s  {args.records / best / 1e6:8.2f} M records/s")

    (_, fast, t_fast, _), (_, slow, t_slow, _) = rows
    if fast != slow:
        raise SystemExit(f"counter mismatch:\n  numba  {fast}\n  python {slow}")
    print(f"counters identical; speedup {t_slow / t_fast:.1f}x")


if __name__ == "__main__":
    main()
