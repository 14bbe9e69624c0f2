"""Time the numba and numpy flavours of each hot kernel on the same inputs.

    python3 benchmarks/bench_kernels.py [--sizes 8 32 128] [--repeat 5]

Both flavours are imported directly, so one process compares them. The numba
column is empty when numba is missing or FGNFILTER_DISABLE_NUMBA is set (the
``_nb`` functions are then plain Python loops and are reported as such).
"""
import argparse
import timeit

import numpy as np

from fgnfilter import kernels
from fgnfilter._jit import NUMBA_AVAILABLE
from fgnfilter.noise import NoiseModel, covariance_matrix


def _cases(n, rng, paths):
    h = rng.uniform(-1.2, 1.2, n)
    P = kernels.transition_table_np(h)
    rho1, rho2 = NoiseModel(0.75).table(n), NoiseModel(0.6).table(n)
    sigma, gamma, gain, D = rng.uniform(-1, 1, (4, n))
    coefs = rng.uniform(-1, 1, (7, n))
    x0 = rng.normal(size=paths)
    w1, w2 = rng.normal(size=(2, n, paths))
    C = covariance_matrix(NoiseModel(0.9), n)
    return {
        "psd_cholesky": (C, kernels.PIVOT_CLAMP, kernels.PIVOT_FAIL),
        "transition_table": (h,),
        "k_closed": (P, 0.5, sigma, gain * gamma, rho1, rho2),
        "q_terms": (P, 0.5, sigma, gamma, gain, D, rho1, rho2),
        "simulate_paths": (*coefs, x0, w1, w2, 0.0),
    }


def _best(fn, args, repeat):
    number = 1
    while timeit.timeit(lambda: fn(*args), number=number) < 0.05:
        number *= 2
    return min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[8, 32, 128])
    ap.add_argument("--paths", type=int, default=10_000, help="paths for simulate_paths")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    print(f"numba available: {NUMBA_AVAILABLE}")
    print(f"{'kernel':<18}{'N':>6}{'numba [ms]':>14}{'numpy [ms]':>14}{'speedup':>10}")
    for n in args.sizes:
        for name, inputs in _cases(n, rng, args.paths).items():
            nb = getattr(kernels, f"{name}_nb")
            np_ = getattr(kernels, f"{name}_np")
            nb(*inputs)  # compile outside the timed region
            t_nb = _best(nb, inputs, args.repeat) if NUMBA_AVAILABLE else float("nan")
            t_np = _best(np_, inputs, args.repeat)
            print(f"{name:<18}{n:>6}{1e3 * t_nb:>14.4f}{1e3 * t_np:>14.4f}{t_np / t_nb:>10.2f}")


if __name__ == "__main__":
    main()
