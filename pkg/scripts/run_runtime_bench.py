"""Scoring time per record for brute-force, heuristic and clustered assignment.

Uniform points in the unit cube against P evenly spaced parallel planes;
k defaults to ceil(sqrt(N/2)). Timings are machine-specific; the ratios
are what matter.
"""

import argparse

import numpy as np

from metatrust.evaluation import benchmark_runtime, parallel_planes


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[1000, 10_000])
    ap.add_argument("--planes", type=int, nargs="+", default=[1, 4, 8])
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    print("n_points,n_planes,brute_ns,heuristic_ns,clustered_ns,brute/clustered,brute/heuristic")
    for n in args.n:
        X = np.random.default_rng(args.seed).random((n, 3))
        for p in args.planes:
            t = benchmark_runtime(parallel_planes(p), X, repeats=args.repeats, seed=args.seed)
            b, h, c = t["brute-force"], t["heuristic"], t["clustered"]
            print(f"{n},{p},{b:.1f},{h:.1f},{c:.1f},{b / c:.1f},{b / h:.2f}")


if __name__ == "__main__":
    main()
