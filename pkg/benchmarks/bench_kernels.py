"""Compare the compiled and pure-Python term-merging kernels.

Usage::

    python benchmarks/bench_kernels.py [--terms 2000] [--repeat 5]

Also times a realistic workload (the full verifier bundle on a catalog curve),
swapping the backend that the exponential-polynomial algebra dispatches to.
"""

import argparse
import time

import numpy as np

from hyperquadric import _kernels_py, kernels
from hyperquadric.catalog import catalog
from hyperquadric.curves import verify_curve
from hyperquadric.exppoly import EPS_FREQ

try:
    from hyperquadric import _kernels as _compiled
except ImportError:
    _compiled = None


def make_input(terms, width, seed=0):
    rng = np.random.default_rng(seed)
    # a few hundred distinct frequencies, each repeated with tiny jitter
    base = rng.normal(size=max(terms // 8, 1)) + 1j * rng.normal(size=max(terms // 8, 1))
    freqs = rng.choice(base, size=terms) + 1e-12 * rng.normal(size=terms)
    coeffs = rng.normal(size=(terms, width)) + 1j * rng.normal(size=(terms, width))
    order = np.lexsort((freqs.imag, freqs.real))
    return (np.ascontiguousarray(freqs.real[order]), np.ascontiguousarray(freqs.imag[order]),
            np.ascontiguousarray(coeffs[order]))


def best_time(fn, args, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--terms", type=int, default=2000)
    parser.add_argument("--width", type=int, default=4)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    fre, fim, coeffs = make_input(args.terms, args.width)
    call = (fre, fim, coeffs, EPS_FREQ)
    t_py = best_time(_kernels_py.cluster_sum, call, args.repeat)
    print(f"cluster_sum  terms={args.terms}  python: {t_py * 1e3:9.3f} ms")
    if _compiled is None:
        print("compiled extension not built; run `pip install -e . --no-build-isolation`")
        return
    t_cy = best_time(_compiled.cluster_sum, call, args.repeat)
    a, b = _kernels_py.cluster_sum(*call), _compiled.cluster_sum(*call)
    agree = all(np.allclose(x, y, rtol=0, atol=1e-12) for x, y in zip(a, b))
    print(f"cluster_sum  terms={args.terms}  cython: {t_cy * 1e3:9.3f} ms"
          f"  speedup {t_py / t_cy:6.1f}x  outputs agree: {agree}")

    curve = catalog("q4_family").curve
    times = {}
    for name, fn in (("python", _kernels_py.cluster_sum), ("cython", _compiled.cluster_sum)):
        saved = kernels.cluster_sum
        kernels.cluster_sum = fn
        try:
            times[name] = best_time(verify_curve, (curve,), max(1, args.repeat // 2))
        finally:
            kernels.cluster_sum = saved
    print(f"verify_curve q4_family  python: {times['python'] * 1e3:8.1f} ms"
          f"  cython: {times['cython'] * 1e3:8.1f} ms"
          f"  speedup {times['python'] / times['cython']:5.2f}x")


if __name__ == "__main__":
    main()
