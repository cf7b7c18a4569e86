"""Timing comparison of the compiled kernels against the pure-numpy fallback.

Run as a script:

    python3 benchmarks/bench_backends.py [--repeat N]

Each kernel is timed best-of-N (default 5) on fixed random inputs so the
numbers are comparable across runs and machines.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from amocboot import _pykernels

try:
    from amocboot import _kernels
except ImportError:
    _kernels = None


def best_of(repeat: int, fn, *args) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def make_cases():
    rng = np.random.default_rng(1)

    x = rng.normal(size=100_000)
    x[60_000:] += 0.5
    yield "cusum_stats  n=1e5 gamma=0.5", "cusum_stats", (x, 0.5)

    n, block, b = 80, 8, 10_000
    res = rng.normal(size=n)
    res -= res.mean()
    offsets = rng.integers(0, n, size=(b, -(-n // block)))
    yield (
        "bootstrap_mstars  n=80 B=1e4 K=8",
        "bootstrap_mstars",
        (res, offsets, block, 40, 0.0, 1.0, 0.5),
    )

    z = rng.standard_normal((2000, 2 * 4000))
    yield "walk_argmax  R=2000 N=4000/side", "walk_argmax", (z, 0.05, 0.5, 0.5)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5, help="timings per kernel (default: 5)")
    args = parser.parse_args()

    if _kernels is None:
        print("compiled extension not available; timing the python backend only")

    header = f"{'kernel':36s} {'python':>10s} {'compiled':>10s} {'speedup':>8s}"
    print(header)
    print("-" * len(header))
    for label, name, call_args in make_cases():
        t_py = best_of(args.repeat, getattr(_pykernels, name), *call_args)
        if _kernels is None:
            print(f"{label:36s} {t_py * 1e3:9.2f}ms {'-':>10s} {'-':>8s}")
            continue
        t_c = best_of(args.repeat, getattr(_kernels, name), *call_args)
        print(f"{label:36s} {t_py * 1e3:9.2f}ms {t_c * 1e3:9.2f}ms {t_py / t_c:7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
