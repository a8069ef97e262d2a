"""Time the numba and numpy flavours of each hot kernel on the same inputs.

Run with ``python benchmarks/bench_kernels.py [--repeat N]``.  The numba
column excludes compilation (one warm-up call per kernel).  Results are also
checked for agreement, so a mismatch shows up here before it shows up in a
coverage table.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from ltpi import _kernels
from ltpi._accel import HAS_NUMBA


def _cases(rng):
    T, m, B = 260, 130, 1000
    eps = rng.standard_normal(5000)
    phi, theta = np.array([0.5, -0.2]), np.array([0.3])
    e = rng.standard_normal(2000)
    h = 1.0 + rng.random(2000)
    return {
        "sb_indices": (rng.integers(0, T, (B, m)), rng.random((B, m)), 1 / 8.0, T),
        "arma_filter": (eps, phi, theta),
        "arma_residuals": (eps, phi, theta),
        "garch_variance": (e, 0.1, 0.1, 0.8, 1.0),
        "gaussian_nll": (e, h),
        "arma_garch_nll": (eps[:260], 0.0, phi, theta, 0.1, 0.1, 0.8, True),
        "simulate_paths": (rng.standard_normal((B, m)), 0.0, phi, theta, 0.1, 0.1, 0.8,
                           np.zeros(2), np.zeros(1), 1.0),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=50)
    args = ap.parse_args(argv)
    if not HAS_NUMBA:
        print("numba is not installed; only the numpy column is meaningful")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<16}{'numpy ms':>12}{'numba ms':>12}{'speed-up':>10}  agree")
    for name, args_ in _cases(rng).items():
        slow = _kernels.implementation(name, use_numba=False)
        fast = _kernels.implementation(name, use_numba=True)
        ref = slow(*args_)
        got = fast(*args_)  # warm-up compiles
        agree = np.allclose(ref, got, rtol=1e-9, atol=1e-12)
        t_slow = min(timeit.repeat(lambda: slow(*args_), number=1, repeat=args.repeat))
        t_fast = min(timeit.repeat(lambda: fast(*args_), number=1, repeat=args.repeat))
        print(f"{name:<16}{1e3 * t_slow:>12.3f}{1e3 * t_fast:>12.3f}"
              f"{t_slow / t_fast:>10.1f}  {agree}")


if __name__ == "__main__":
    main()
