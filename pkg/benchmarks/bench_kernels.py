"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--end-to-end]

Inputs mimic the optimizer's shapes: 134 training points in 10 dimensions for
the GP kernels, a 275-member population and a 5000-point reference front for
the indicators. ``--end-to-end`` also times a short optimizer run with
``SBPBO_NUMBA=1`` and ``SBPBO_NUMBA=0`` in fresh interpreters.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from sbpbo.kernels import numba_kernels, numpy_kernels

E2E = """
import time
from sbpbo.benchmarks import BenchmarkSpec, make_problem, sample_reference_front
from sbpbo.optimizer import OptimizerConfig, run
spec = BenchmarkSpec("DTLZ2", 3, 10)
front, _ = sample_reference_front(spec, 1000)
t = time.perf_counter()
run(make_problem(spec, (5, 5, 1)), OptimizerConfig(fe_max_expensive=130, seed=0), front)
print(time.perf_counter() - t)
"""


def cases(rng):
    X = rng.random((134, 10))
    inv_ls2 = 1.0 / rng.uniform(0.1, 2.0, 10) ** 2
    C = numpy_kernels.sq_exp_corr(X, X, inv_ls2)
    W = rng.random((134, 134))
    W = W + W.T  # the kernel assumes symmetric C and W
    F = rng.random((1000, 3))
    A, Z = rng.random((275, 3)), rng.random((5000, 3))
    return {
        "sq_exp_corr 134x134 d=10": ("sq_exp_corr", (X, X, inv_ls2)),
        "lml_grad_terms n=134 d=10": ("lml_grad_terms", (X, C, W, inv_ls2)),
        "nondominated_mask 1000x3": ("nondominated_mask", (F,)),
        "min_dplus 275 vs 5000": ("min_dplus", (A, Z)),
        "min_dist 275 vs 5000": ("min_dist", (A, Z)),
    }


def best_time(fn, args, repeat):
    number = max(1, int(0.2 / max(timeit.timeit(lambda: fn(*args), number=1), 1e-6)))
    return min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number


def end_to_end():
    out = {}
    for flag in ("1", "0"):
        env = {**os.environ, "SBPBO_NUMBA": flag}
        res = subprocess.run([sys.executable, "-c", E2E], env=env, capture_output=True, text=True, check=True)
        out[flag] = float(res.stdout.strip().splitlines()[-1])
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--end-to-end", action="store_true")
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    print(f"{'kernel':30s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s}")
    for label, (name, inputs) in cases(rng).items():
        nb, npk = getattr(numba_kernels, name), getattr(numpy_kernels, name)
        nb(*inputs)  # compile outside the timing
        np.testing.assert_allclose(np.asarray(nb(*inputs), float), np.asarray(npk(*inputs), float),
                                   rtol=1e-10, atol=1e-12)
        t_np, t_nb = best_time(npk, inputs, args.repeat), best_time(nb, inputs, args.repeat)
        print(f"{label:30s} {t_np * 1e3:11.3f} {t_nb * 1e3:11.3f} {t_np / t_nb:8.2f}")

    if args.end_to_end:
        t = end_to_end()
        print(f"\noptimizer run, 7 iterations: numba {t['1']:.1f} s, numpy {t['0']:.1f} s")


if __name__ == "__main__":
    main()
