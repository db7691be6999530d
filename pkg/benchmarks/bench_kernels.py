"""Time the compiled interference kernel against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--realizations 2000] [--repeat 5]

Inputs are one Monte Carlo chunk at the default network parameters.
"""
import argparse
import math
import timeit

import numpy as np

from d2dcache import kernels
from d2dcache.config import NetworkConfig
from d2dcache.monte_carlo import McConfig


def chunk_inputs(realizations, seed=0):
    net = NetworkConfig()
    radius = McConfig(1, seed, net).radius
    rng = np.random.default_rng(seed)
    counts = rng.poisson(net.lambda_p * math.pi * radius ** 2, size=realizations)
    total = int(counts.sum())
    arrays = (counts, rng.random(total), rng.random(total), rng.standard_normal(total),
              rng.standard_normal(total), rng.standard_exponential(total))
    return arrays, (radius, net.sigma, net.p_d, net.alpha), total


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--realizations", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    arrays, scalars, total = chunk_inputs(args.realizations)
    print(f"{args.realizations} realizations, {total} interferers")
    results = {}
    for backend in kernels.available_backends():
        def run():
            return kernels.interference_sums(*arrays, *scalars, backend=backend)
        results[backend] = run()
        best = min(timeit.repeat(run, number=1, repeat=args.repeat))
        print(f"{backend:>9}: {best * 1e3:8.1f} ms  ({best / total * 1e9:5.1f} ns per interferer)")
    if len(results) == 2:
        a, b = results["compiled"], results["python"]
        print(f"max relative difference: {float(np.max(np.abs(a - b) / np.abs(b))):.2e}")
    else:
        print("compiled kernels not available; only the fallback was timed")


if __name__ == "__main__":
    main()
