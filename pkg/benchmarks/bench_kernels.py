"""Time the numba kernels against the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``. Both
implementations are imported directly, so TMANIFOLD_BACKEND is ignored.
The first numba call (compilation or cache load) is excluded from timing.
"""
import argparse
import timeit

import numpy as np

from tmanifold.kernels import _numba, _numpy


def _cases(rng):
    # transform-domain stacks as the graph builders see them: (h, n, p) complex
    for h, n, p in [(3, 100, 16), (5, 200, 32), (9, 400, 32)]:
        xs = rng.standard_normal((h, n, p)) + 1j * rng.standard_normal((h, n, p))
        xs[0] = xs[0].real
        dist = _numpy.pairwise_sqdist(xs)
        cand = np.ones((n, n), dtype=bool)
        yield f"pairwise_sqdist h={h} n={n} p={p}", "pairwise_sqdist", (xs,)
        yield f"knn_mask k=10 h={h} n={n}", "knn_mask", (dist, 10, cand)
        yield f"lme_weights k=8 h={h} n={n} p={p}", "lme_weights", (xs, 8, 1e-3, 1e12)
    for m, n, q in [(100, 400, 64), (500, 2000, 64)]:
        test = rng.standard_normal((m, q))
        train = rng.standard_normal((n, q))
        yield f"nearest_index m={m} n={n} q={q}", "nearest_index", (test, train)
    for n3, n1, n2 in [(8, 16, 16), (16, 32, 32)]:
        slices = rng.standard_normal((n3, n1, n2))
        yield f"bcirc_matrix n3={n3} {n1}x{n2}", "bcirc_matrix", (slices,)


def _best(fn, args, repeat):
    timer = timeit.Timer(lambda: fn(*args))
    number, _ = timer.autorange()
    return min(timer.repeat(repeat, number)) / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    print(f"{'case':<40} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for label, name, call_args in _cases(rng):
        fast, slow = getattr(_numba, name), getattr(_numpy, name)
        fast(*call_args)  # warm-up: compile or load from cache
        t_np = _best(slow, call_args, args.repeat)
        t_nb = _best(fast, call_args, args.repeat)
        print(f"{label:<40} {1e3 * t_np:>10.3f} {1e3 * t_nb:>10.3f} {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
