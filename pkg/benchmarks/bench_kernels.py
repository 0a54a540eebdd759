"""Timing comparison of the numba kernels against their NumPy fallbacks.

Run:  python benchmarks/bench_kernels.py [pool_size]

The same synthetic register pool is pushed through both implementations
of each kernel; outputs are asserted identical before timing.
"""

from __future__ import annotations

import sys
import time

import numpy as np

import quditqkd._kernels as kernels
from quditqkd.fields import make_field


def _time(fn, *args, repeats: int = 5) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 2_000_000
    gf = make_field(2, 4)
    add_t = gf.add_table.astype(np.uint8)
    rng = np.random.default_rng(1)
    a = rng.integers(0, 16, n, dtype=np.uint8)
    b = rng.integers(0, 16, n, dtype=np.uint8)
    s = rng.integers(0, 16, n, dtype=np.uint8)
    bob = add_t[s, a]
    perm = rng.permutation(n)
    r = 25
    ell = n // r
    groups = b[: ell * r].reshape(ell, r)

    if not kernels.USING_NUMBA:
        print("numba disabled (QUDIT_QKD_NO_NUMBA set); nothing to compare")
        return

    pairs = [
        ("ep_round", kernels._ep_round_nb, kernels._ep_round_np, (a, b, s, bob, perm, add_t)),
        ("group_sums", kernels._group_sums_nb, kernels._group_sums_np, (groups, ell, r, add_t)),
        ("plurality", kernels._plurality_nb, kernels._plurality_np, (groups, ell, r, 16)),
    ]
    print(f"pool size {n}, r = {r}")
    print(f"{'kernel':<12} {'numba':>10} {'numpy':>10} {'speedup':>8}")
    for name, nb, npf, args in pairs:
        got_nb, got_np = nb(*args), npf(*args)
        if isinstance(got_nb, tuple):
            assert all((x == y).all() for x, y in zip(got_nb, got_np))
        else:
            assert (got_nb == got_np).all()
        nb(*args)  # warm the JIT before timing
        t_nb = _time(nb, *args)
        t_np = _time(npf, *args)
        print(f"{name:<12} {t_nb * 1e3:>8.2f}ms {t_np * 1e3:>8.2f}ms {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
