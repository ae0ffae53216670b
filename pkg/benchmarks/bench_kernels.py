#!/usr/bin/env python3
"""Benchmark the jitted kernels against their pure-Python fallbacks.

The fallback path is what runs when NULLDIST_DISABLE_NUMBA=1 is set (or
numba is missing); this script times both implementations on the same grid
so the trade-off is visible.  Run:

    python3 benchmarks/bench_kernels.py [--dim 4] [--h 0.25]
"""

import argparse
import time

import numpy as np

from nulldist import _kernels, build_grid, builtin, coordinate_time
from nulldist.timefn import cosmological_time_numeric


def time_call(fn, *args, repeat=3):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--dim", type=int, default=4)
    ap.add_argument("--h", type=float, default=0.25)
    args = ap.parse_args()

    st = builtin("upper_half_minkowski", dim=args.dim)
    tau = coordinate_time(st)
    box = [(0.5, 3.5)] + [(-1.5, 1.5)] * (args.dim - 1)
    t0 = time.perf_counter()
    grid = build_grid(st, tau, box, args.h)
    print(f"grid: {grid.n_nodes} nodes, {grid.n_edges} directed edges "
          f"(built in {time.perf_counter() - t0:.2f}s, numpy-vectorized)")
    print(f"numba available: {_kernels.HAVE_NUMBA} "
          f"(disable with NULLDIST_DISABLE_NUMBA=1)")

    src = grid.node_of([1.0] + [0.0] * (args.dim - 1))
    indptr, nbr, wt = grid.csr_undirected()
    d_indptr, d_nbr, _ = grid.csr_out()
    order = grid.topological_order()
    lengths = grid.out_edge_values(grid.edge_len)
    base = np.zeros(grid.n_nodes)

    rows = []
    # warm the compiled paths before timing
    _kernels.dijkstra(indptr, nbr, wt, src, -1)
    _kernels.bfs_reach(d_indptr, d_nbr, src)
    _kernels.longest_path_values(order, d_indptr, d_nbr, lengths, base)

    for name, fast, slow, call in (
        ("dijkstra", _kernels.dijkstra, _kernels.dijkstra_py,
         (indptr, nbr, wt, src, -1)),
        ("bfs_reach", _kernels.bfs_reach, _kernels.bfs_reach_py,
         (d_indptr, d_nbr, src)),
        ("longest_path", _kernels.longest_path_values, _kernels.longest_path_values_py,
         (order, d_indptr, d_nbr, lengths, base)),
    ):
        t_fast, r_fast = time_call(fast, *call)
        t_slow, r_slow = time_call(slow, *call, repeat=1)
        a = r_fast[0] if isinstance(r_fast, tuple) else r_fast
        b = r_slow[0] if isinstance(r_slow, tuple) else r_slow
        agree = np.allclose(np.asarray(a, dtype=float), np.asarray(b, dtype=float),
                            equal_nan=True)
        rows.append((name, t_fast, t_slow, t_slow / t_fast if t_fast > 0 else float("inf"),
                     agree))

    print(f"\n{'kernel':<14}{'selected':>12}{'pure python':>14}{'speedup':>10}  agree")
    for name, tf, ts, sp, agree in rows:
        print(f"{name:<14}{tf * 1e3:>10.1f}ms{ts * 1e3:>12.1f}ms{sp:>9.1f}x  {agree}")

    t0 = time.perf_counter()
    cosmological_time_numeric(grid)
    print(f"\nend-to-end cosmological time DP: {time.perf_counter() - t0:.2f}s")


if __name__ == "__main__":
    main()
