"""Compare the compiled and pure numpy trial kernels.

Usage: python3 benchmarks/bench_kernel.py [--trials N] [--repeat R]

Both backends consume the same per-trial streams, so the table also
confirms that their outputs agree bit for bit.
"""
import argparse
import time

import numpy as np

from arqtc import NetworkParams
from arqtc.sim import BACKENDS, SimConfig, simulate_first_success

CASES = [
    ("sparse", 1e-4, [1.0], [6]),
    ("reference", 0.1, [1.0], [6]),
    ("dense", 0.5, [1.0], [6]),
    ("two-hop", 0.1, [1.0, 1.0], [2, 2]),
]


def best_time(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    if "cython" not in BACKENDS:
        print("compiled kernel not built; run `pip install --no-build-isolation -e .` first")
        return 1
    print(f"{'case':<10} {'lambda':>8} {'python s':>9} {'cython s':>9} {'speedup':>8}  identical")
    for name, lam, hops, budgets in CASES:
        params = NetworkParams(lam=lam, p=0.5, alpha=3.0, beta=3.0)
        times, outs = {}, {}
        for backend in ("python", "cython"):
            cfg = SimConfig(trials=args.trials, seed=1, backend=backend)
            times[backend], outs[backend] = best_time(
                lambda: simulate_first_success(hops, budgets, params, cfg), args.repeat)
        same = np.array_equal(outs["python"], outs["cython"])
        print(f"{name:<10} {lam:>8g} {times['python']:>9.3f} {times['cython']:>9.3f} "
              f"{times['python'] / times['cython']:>7.1f}x  {'yes' if same else 'NO'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
