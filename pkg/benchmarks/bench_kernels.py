"""Compare the numba and numpy backends on the hot kernels.

    python benchmarks/bench_kernels.py [--repeat 5]

Reports the best wall time per backend and the max absolute difference
between the two results.  Requires numba for the numba column.
"""
import argparse
import time

import numpy as np

from higherindex import HAVE_NUMBA, conv, kernels


def best_time(fn, repeat):
    fn()  # warm-up (and JIT compilation)
    ts = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t)
    return min(ts)


def cases(rng):
    g = conv.LatticeGroup(2, 0.25, 32, periodic=True)
    a = conv.random_decaying(g, rng, scale=0.6)
    b = conv.random_decaying(g, rng, scale=0.6)
    c = conv.random_decaying(g, rng, scale=0.6)
    yield "convolve (65x65)", lambda be: conv.convolve(a, b, backend=be).values
    yield "tau area (65x65)", lambda be: np.array([conv._tau_area2(a, b, c, backend=be)])
    gk = conv.LatticeGroup(2, 0.5, 6, periodic=True)
    w = rng.uniform(0.5, 1.5, 4)
    k1 = kernels.simple_tensor(conv.random_decaying(gk, rng, 0.5), kernels.random_projection(4, 2, rng), w)
    k2 = kernels.simple_tensor(conv.random_decaying(gk, rng, 0.5), kernels.random_projection(4, 1, rng), w)
    yield "kernel_convolve (13x13, S=4)", lambda be: kernels.kernel_convolve(k1, k2, backend=be).values


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    print(f"{'kernel':32s}" + "".join(f"{b:>12s}" for b in backends) + f"{'max|diff|':>12s}")
    for name, fn in cases(np.random.default_rng(args.seed)):
        times = [best_time(lambda: fn(b), args.repeat) for b in backends]
        diff = float(np.max(np.abs(fn("numpy") - fn(backends[-1]))))
        print(f"{name:32s}" + "".join(f"{t * 1e3:10.2f}ms" for t in times) + f"{diff:12.2e}")


if __name__ == "__main__":
    main()
