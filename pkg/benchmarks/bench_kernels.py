"""Compare the compiled and pure-Python spline kernels.

Usage::

    python3 benchmarks/bench_kernels.py [--points N] [--repeat R]

Reports the best wall time per call of ``find_spans`` and ``basis_ders`` for
each degree, the speedup and the largest difference between the backends.
"""
import argparse
import timeit

import numpy as np

from overlapiga import _kernels_py

try:
    from overlapiga import _kernels
except ImportError:  # extension not built
    _kernels = None


def bench(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument('--points', type=int, default=200000)
    ap.add_argument('--repeat', type=int, default=5)
    ap.add_argument('--seed', type=int, default=0)
    args = ap.parse_args(argv)
    if _kernels is None:
        print('compiled extension not available; only the Python backend can run')
        return 1
    rng = np.random.default_rng(args.seed)
    x = rng.random(args.points)
    print('%-4s %-11s %12s %12s %9s %10s' % ('p', 'kernel', 'python_ms', 'cython_ms', 'speedup',
                                            'max_diff'))
    for p in (2, 3, 4):
        knots = np.concatenate([np.zeros(p), np.linspace(0.0, 1.0, 65), np.ones(p)])
        s_py = _kernels_py.find_spans(knots, p, x)
        s_cy = _kernels.find_spans(knots, p, x)
        cases = [
            ('find_spans', lambda m: m.find_spans(knots, p, x),
             float(np.max(np.abs(s_py - s_cy)))),
            ('basis_ders', lambda m: m.basis_ders(knots, p, x, s_py, 2),
             float(np.max(np.abs(_kernels_py.basis_ders(knots, p, x, s_py, 2)
                                 - _kernels.basis_ders(knots, p, x, s_py, 2))))),
        ]
        for name, call, diff in cases:
            t_py = bench(lambda: call(_kernels_py), args.repeat)
            t_cy = bench(lambda: call(_kernels), args.repeat)
            print('%-4d %-11s %12.3f %12.3f %9.1f %10.2e'
                  % (p, name, 1e3 * t_py, 1e3 * t_cy, t_py / t_cy, diff))
    return 0


if __name__ == '__main__':
    raise SystemExit(main())
