"""Compiled Jacobi/g_inverse kernels against the numpy fallback (and LAPACK).

    python3 benchmarks/bench_kernels.py [--sizes 5 21 41] [--repeat 20]
"""
import argparse
import timeit

import numpy as np

from qretomo import _kernels_py

try:
    from qretomo import _kernels as compiled
except ImportError:
    compiled = None


def bench(fn, repeat):
    fn()
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--sizes", type=int, nargs="+", default=[5, 11, 21, 41])
    p.add_argument("--repeat", type=int, default=20)
    args = p.parse_args()
    rng = np.random.default_rng(0)
    if compiled is None:
        print("compiled extension not built; only the fallback is timed")
    print(f"{'kernel':<14}{'N':>5}{'compiled ms':>14}{'fallback ms':>14}{'LAPACK ms':>12}{'speedup':>10}")
    for n in args.sizes:
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        a = 0.5 * (a + a.conj().T)
        t_py = bench(lambda: _kernels_py.jacobi_eigh(a), args.repeat)
        t_la = bench(lambda: np.linalg.eigh(a), args.repeat)
        t_c = bench(lambda: compiled.jacobi_eigh(a), args.repeat) if compiled else float("nan")
        print(f"{'jacobi_eigh':<14}{n:>5}{1e3 * t_c:>14.3f}{1e3 * t_py:>14.3f}{1e3 * t_la:>12.3f}"
              f"{t_py / t_c:>10.1f}")
    t = np.linspace(-700, 700, 100_000)
    t_py = bench(lambda: _kernels_py.g_inverse_array(t), args.repeat)
    t_c = bench(lambda: compiled.g_inverse_array(t), args.repeat) if compiled else float("nan")
    print(f"{'g_inverse':<14}{'1e5':>5}{1e3 * t_c:>14.3f}{1e3 * t_py:>14.3f}{'-':>12}{t_py / t_c:>10.1f}")


if __name__ == "__main__":
    main()
