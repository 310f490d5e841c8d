"""Compiled vs pure-Python kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints the best-of-N time per call for each backend and the speedup.
"""

import argparse
import timeit

import numpy as np

from ellqg import _kernels_py
from ellqg.combinatorics import permutation_table
from ellqg.theta import LatticeParams

try:
    from ellqg import _ckernels
except ImportError:
    _ckernels = None


def cases(rng):
    L = LatticeParams(0.2 + 1.1j)
    zs = (rng.random(4000) - 0.5) + (rng.random(4000) - 0.5) * L.tau
    yield "theta_many[4000]", "theta_many", (zs, L.tau, L._qpow, L._qabs, L._norm)
    yield "theta_eval", "theta_eval", (0.3 + 0.2j, L.tau, L._qpow, L._qabs, L._norm)
    for k in (3, 5, 7):
        A = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        B = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        yield f"sym_sum[k={k}]", "sym_sum", (A, B, permutation_table(k))


def best(fn, args, repeat):
    number = 1
    while timeit.timeit(lambda: fn(*args), number=number) < 0.05:
        number *= 2
    return min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    print(f"{'kernel':<18}{'python':>12}{'cython':>12}{'speedup':>10}")
    for label, name, fargs in cases(rng):
        py = best(getattr(_kernels_py, name), fargs, args.repeat)
        if _ckernels is None:
            print(f"{label:<18}{py * 1e6:>10.1f}us{'n/a':>12}{'':>10}")
            continue
        cy = best(getattr(_ckernels, name), fargs, args.repeat)
        a, b = getattr(_kernels_py, name)(*fargs), getattr(_ckernels, name)(*fargs)
        assert np.allclose(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex),
                           rtol=1e-12, atol=0)
        print(f"{label:<18}{py * 1e6:>10.1f}us{cy * 1e6:>10.1f}us{py / cy:>9.1f}x")


if __name__ == "__main__":
    main()
