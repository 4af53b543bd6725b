"""Compare the numba and numpy kernel backends.

Usage: python benchmarks/bench_kernels.py [--size 256] [--repeat 3]
"""
import argparse
import time

import numpy as np

from jointsa import kernels
from jointsa.anisotropy import fibonacci_lattice
from jointsa.polarimetry import PolImage, covariance_field, kennaugh_from_covariance


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=256, help="image side in pixels")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    n = args.size
    g = rng.standard_normal((3, n, n)) + 1j * rng.standard_normal((3, n, n))
    img = PolImage(g[0], g[1], g[2])
    field = covariance_field(img, 5)
    flat = field.data.reshape(n, n, 9)
    stack = field.data.reshape(-1, 3, 3)
    K = kennaugh_from_covariance(stack[: n * n // 16])
    lat = fibonacci_lattice()

    cases = {
        f"box_sum {n}x{n}x9, half=5": lambda: kernels.box_sum(flat, 5),
        f"yamaguchi4 {n * n} px": lambda: kernels.yamaguchi4(stack),
        f"dop_extrema {K.shape[0]} px": lambda: kernels.dop_extrema(K, lat),
    }
    print(f"{'kernel':32s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s}")
    for label, fn in cases.items():
        res = {}
        for name in ("numba", "numpy"):
            with kernels.use_backend(name):
                fn()  # warm-up (numba compilation)
                res[name] = _best(fn, args.repeat)
        print(f"{label:32s} {res['numba']:10.3f} {res['numpy']:10.3f} "
              f"{res['numpy'] / res['numba']:8.1f}x")


if __name__ == "__main__":
    main()
