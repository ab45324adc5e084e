"""Time the compiled and pure-numpy kernel backends on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each workload is run once untimed (so numba compilation or cache loading is
excluded), then timed ``repeat`` times; the best time is reported.  Outputs
of the two backends are compared before timing.
"""
import argparse
import time

import numpy as np

from fewbits import _kernels
from fewbits.solver import weighted_values


def workloads(rng):
    a = np.array(weighted_values(4, 22), dtype=np.uint64)
    b = np.array(weighted_values(4, 22), dtype=np.uint64)
    x = rng.integers(0, 1 << 32, 200_000, dtype=np.uint64)
    y = rng.integers(0, 1 << 32, 200_000, dtype=np.uint64)
    sizes = rng.integers(1, 13, 100_000)
    exps = rng.integers(0, 31, (100_000, 12))
    return {
        "pair_search k=4 box 2^22": lambda impl: impl.pair_search(a, b, 4, 0, True, False),
        "pair_search k=3 ab<2^40": lambda impl: impl.pair_search(a, b, 3, 1 << 40, False, False),
        "square_search k=3 a<2^22": lambda impl: impl.square_search(1, 1 << 22, 3),
        "sparse_mul_batch 2e5": lambda impl: impl.sparse_mul_batch(x, y),
        "collapse_batch 1e5": lambda impl: impl.collapse_batch(exps, sizes),
        "popcount 2e5": lambda impl: impl.popcount(x),
    }


def same(u, v):
    if isinstance(u, tuple):
        return all(same(p, q) for p, q in zip(u, v))
    return np.array_equal(np.asarray(u), np.asarray(v))


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _kernels.numba_impl is None:
        raise SystemExit("numba backend unavailable; nothing to compare")
    rng = np.random.default_rng(0)
    print(f"{'workload':30s} {'numpy s':>10s} {'numba s':>10s} {'speedup':>8s}")
    for name, work in workloads(rng).items():
        ref = work(_kernels.numpy_impl)
        got = work(_kernels.numba_impl)
        if not same(ref, got):
            raise SystemExit(f"{name}: backends disagree")
        t_np = best_of(lambda: work(_kernels.numpy_impl), args.repeat)
        t_nb = best_of(lambda: work(_kernels.numba_impl), args.repeat)
        print(f"{name:30s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:7.1f}x")


if __name__ == "__main__":
    main()
