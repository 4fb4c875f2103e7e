"""Time the compiled and numpy Monte-Carlo kernels on the default scenario.

    python bench/bench_kernels.py --trials 2000 --groups 1 5 24
"""

import argparse
import time

from risgroup import SystemParams
from risgroup._backend import BACKEND
from risgroup.rate import mc_achievable_rate


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        res = fn()
        times.append(time.perf_counter() - t0)
    return min(times), res


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--groups", type=int, nargs="+", default=[1, 2, 5, 8, 24, 64])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--csi", choices=["estimated", "perfect"], default="estimated")
    args = ap.parse_args()

    backends = ["python"] + (["cython"] if BACKEND == "cython" else [])
    if len(backends) == 1:
        print("compiled kernel not available; timing the numpy fallback only")
    print(f"{'B':>4} {'K_prime':>7} " + " ".join(f"{b + ' [us/trial]':>20}" for b in backends) + f" {'speedup':>8} {'|rate diff|':>12}")
    for B in args.groups:
        p = SystemParams.from_scenario(B=B)
        row = {}
        for be in backends:
            dt, res = best_of(lambda: mc_achievable_rate(p, args.trials, 1, csi=args.csi, backend=be), args.repeat)
            row[be] = (dt, res.rate)
        cols = " ".join(f"{row[b][0] / args.trials * 1e6:20.1f}" for b in backends)
        if "cython" in row:
            speedup = row["python"][0] / row["cython"][0]
            diff = abs(row["python"][1] - row["cython"][1])
            print(f"{B:>4} {p.k_prime:>7} {cols} {speedup:8.2f} {diff:12.1e}")
        else:
            print(f"{B:>4} {p.k_prime:>7} {cols}")


if __name__ == "__main__":
    main()
