"""Head-to-head timing of the numpy and numba kernel paths.

Runs each kernel on representative shapes, reports per-call time for both
implementations and their ratio, and checks agreement on the way.  The
compiled path is warmed before timing so JIT compilation is not measured.

Usage: python benchmarks/bench_kernels.py [--iterations N]
"""

import argparse
import time

import numpy as np

from freqca import kernels
from freqca.frequency import dct2_matrix


def time_call(fn, args, iterations):
    fn(*args)  # warmup / JIT
    best = float("inf")
    for _ in range(3):
        start = time.perf_counter()
        for _ in range(iterations):
            fn(*args)
        best = min(best, (time.perf_counter() - start) / iterations)
    return best


def bench(name, np_fn, nb_fn, args, iterations):
    ref = np_fn(*args)
    out = nb_fn(*args)
    err = float(np.max(np.abs(ref - out)))
    t_np = time_call(np_fn, args, iterations)
    t_nb = time_call(nb_fn, args, iterations)
    ratio = t_np / t_nb if t_nb > 0 else float("inf")
    print(
        f"{name:34s} numpy {t_np * 1e6:9.1f} us   numba {t_nb * 1e6:9.1f} us   "
        f"numpy/numba {ratio:5.2f}x   max|diff| {err:.2e}"
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--iterations", type=int, default=200)
    args = parser.parse_args()

    if not kernels.HAS_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    rng = np.random.default_rng(0)
    for tokens, channels in ((16, 64), (64, 256)):
        x = rng.standard_normal((tokens, channels))
        mat = np.asarray(dct2_matrix(channels))
        q = rng.standard_normal((tokens, channels))
        k = rng.standard_normal((tokens, channels))
        v = rng.standard_normal((tokens, channels))
        heads = 4
        print(f"-- tokens={tokens} channels={channels}")
        bench(
            "transform_rows",
            kernels.transform_rows_np,
            kernels.transform_rows_nb,
            (x, mat),
            args.iterations,
        )
        bench(
            "layernorm_rows",
            kernels.layernorm_rows_np,
            kernels.layernorm_rows_nb,
            (x, 1e-12),
            args.iterations,
        )
        bench(
            "attention_core",
            kernels.attention_core_np,
            kernels.attention_core_nb,
            (q, k, v, heads),
            args.iterations,
        )


if __name__ == "__main__":
    main()
