"""Compiled kernels vs. the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 20]

Times the two hot loops (per-user SRZF inverse columns and per-user block
rates) on the desk and full array sizes, and checks both backends agree.
"""

import argparse
import timeit

import numpy as np

from srzf import _kernels_py
from srzf.linalg import gram

try:
    from srzf import _ckernels
except ImportError:                       # built without the extension
    _ckernels = None


def _case(K, N, Mk, rng):
    H = (rng.standard_normal((K * Mk, N)) + 1j * rng.standard_normal((K * Mk, N))) / np.sqrt(2)
    sizes = np.full(K, Mk, dtype=np.intp)
    alphas = np.full(K, 1e-2)
    Y = H @ H.conj().T[:, : K * Mk]
    return np.ascontiguousarray(gram(H)), sizes, alphas, np.ascontiguousarray(Y)


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    print(f"{'case':18s} {'kernel':14s} {'python ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for K, N in ((16, 32), (64, 128)):
        G, sizes, alphas, Y = _case(K, N, 2, rng)
        for name, py_args in (("srzf_columns", (G, sizes, alphas)),
                              ("block_rates", (Y, sizes, 1e-3))):
            f_py = getattr(_kernels_py, name)
            t_py = min(timeit.repeat(lambda: f_py(*py_args), number=1, repeat=args.repeat))
            if _ckernels is None:
                print(f"K={K:<3d} N={N:<8d} {name:14s} {t_py * 1e3:10.3f} {'n/a':>10s}")
                continue
            f_c = getattr(_ckernels, name)
            err = np.max(np.abs(np.asarray(f_c(*py_args)) - np.asarray(f_py(*py_args))))
            t_c = min(timeit.repeat(lambda: f_c(*py_args), number=1, repeat=args.repeat))
            print(f"K={K:<3d} N={N:<8d} {name:14s} {t_py * 1e3:10.3f} {t_c * 1e3:10.3f} "
                  f"{t_py / t_c:7.1f}x   (max diff {err:.1e})")


if __name__ == "__main__":
    main()
