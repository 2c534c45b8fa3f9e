"""Benchmark the jitted kernels against the numpy fallback.

Runs the simplex pivot loop and the monotone transport sweep on the same
inputs through both implementations, reports wall times and the largest
output difference. Invoke from the repository root:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --sizes 8 16 32 --repeat 5
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from natcopula import _kernels
from natcopula.lp import LinearProgram, PIVOT_TOL, solve


def build_transport_tableau(n: int, seed: int):
    """Phase-2 style tableau for an n x n transport LP, plus its basis.

    The rows are the equality system; the starting basis is the
    anti-monotone staircase plan, which is feasible but far from optimal
    for squared-distance cost, so the pivot loop has real work to do
    without running phase 1 here.
    """
    rng = np.random.default_rng(seed)
    xs = np.sort(rng.uniform(0.0, 1.0, n))
    ys = np.sort(rng.uniform(0.0, 1.0, n))
    mu = rng.uniform(0.1, 1.0, n)
    mu /= mu.sum()
    nu = rng.uniform(0.1, 1.0, n)
    nu /= nu.sum()

    diff = xs[:, None] - ys[None, :]
    cost = (diff * diff).ravel()
    m = 2 * n - 1
    a = np.zeros((m, n * n))
    b = np.zeros(m)
    for i in range(n):
        a[i, i * n : (i + 1) * n] = 1.0
        b[i] = mu[i]
    for j in range(n - 1):
        a[n + j, j::n] = 1.0
        b[n + j] = nu[j]

    # staircase with reversed columns gives 2n-1 basic cells
    basic = []
    plan_i, plan_j = 0, n - 1
    row_left = mu.copy()
    col_left = nu.copy()
    while True:
        basic.append(plan_i * n + plan_j)
        move = min(row_left[plan_i], col_left[plan_j])
        row_left[plan_i] -= move
        col_left[plan_j] -= move
        if row_left[plan_i] <= col_left[plan_j] and plan_i < n - 1:
            plan_i += 1
        elif plan_j > 0:
            plan_j -= 1
        else:
            break
    basis = np.asarray(basic[:m], dtype=np.int64)

    frame = np.linalg.solve(a[:, basis], np.concatenate([a, b[:, None]], axis=1))
    tableau = np.zeros((m + 1, n * n + 1))
    tableau[:m] = frame
    tableau[m, :-1] = cost - cost[basis] @ frame[:, :-1]
    tableau[m, -1] = -float(cost[basis] @ frame[:, -1])
    return tableau, basis


def bench_simplex(sizes, repeat):
    print("simplex_core: transport tableaus, both paths on identical copies")
    header = f"{'n':>4} {'pivots':>7} {'numpy':>10} {'numba':>10} {'speedup':>8} {'max|diff|':>10}"
    print(header)
    for n in sizes:
        tableau, basis = build_transport_tableau(n, seed=n)
        best_np = np.inf
        best_nb = np.inf
        out_np = out_nb = None
        for _ in range(repeat):
            t = tableau.copy()
            bas = basis.copy()
            t0 = time.perf_counter()
            st = _kernels.simplex_core_numpy(t, bas, PIVOT_TOL, 10**6)
            best_np = min(best_np, time.perf_counter() - t0)
            out_np = (st, t, bas)
        if _kernels.simplex_core_numba is None:
            print(f"{n:>4} {out_np[0][1]:>7} {best_np:>10.4f} {'-':>10} {'-':>8} {'-':>10}")
            continue
        for _ in range(repeat):
            t = tableau.copy()
            bas = basis.copy()
            t0 = time.perf_counter()
            st = _kernels.simplex_core_numba(t, bas, PIVOT_TOL, 10**6)
            best_nb = min(best_nb, time.perf_counter() - t0)
            out_nb = (st, t, bas)
        same_status = out_np[0] == out_nb[0]
        diff = max(
            float(np.max(np.abs(out_np[1] - out_nb[1]))),
            float(np.max(np.abs(out_np[2] - out_nb[2]))),
        )
        if not same_status:
            diff = float("inf")
        print(
            f"{n:>4} {out_np[0][1]:>7} {best_np:>10.4f} {best_nb:>10.4f}"
            f" {best_np / best_nb:>8.1f} {diff:>10.2e}"
        )


def bench_sweep(sizes, repeat):
    print()
    print("monotone_sweep: sorted random masses, both paths")
    print(f"{'n':>6} {'numpy':>10} {'numba':>10} {'speedup':>8} {'max|diff|':>10}")
    for n in sizes:
        rng = np.random.default_rng(n)
        xs = np.sort(rng.uniform(0.0, 1.0, n))
        ys = np.sort(rng.uniform(0.0, 1.0, n))
        mu = rng.uniform(0.1, 1.0, n)
        mu /= mu.sum()
        nu = rng.uniform(0.1, 1.0, n)
        nu /= nu.sum()
        best_np = np.inf
        best_nb = np.inf
        for _ in range(repeat):
            t0 = time.perf_counter()
            out_np = _kernels.monotone_sweep_numpy(xs, mu, ys, nu)
            best_np = min(best_np, time.perf_counter() - t0)
        if _kernels.monotone_sweep_numba is None:
            print(f"{n:>6} {best_np:>10.4f} {'-':>10} {'-':>8} {'-':>10}")
            continue
        for _ in range(repeat):
            t0 = time.perf_counter()
            out_nb = _kernels.monotone_sweep_numba(xs, mu, ys, nu)
            best_nb = min(best_nb, time.perf_counter() - t0)
        k = out_np[3]
        # entries past the plan length are uninitialized scratch
        diff = max(
            float(np.max(np.abs(out_np[0][:k] - out_nb[0][:k]))),
            float(np.max(np.abs(out_np[1][:k] - out_nb[1][:k]))),
            float(np.max(np.abs(out_np[2][:k] - out_nb[2][:k]))),
            float(abs(out_np[3] - out_nb[3])),
            abs(out_np[4] - out_nb[4]),
        )
        print(f"{n:>6} {best_np:>10.4f} {best_nb:>10.4f} {best_np / best_nb:>8.1f} {diff:>10.2e}")


def bench_end_to_end(repeat):
    """Whole-solver timing on the copula-shaped LP from the test fixture."""
    import pathlib

    fixture = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data" / "lp_refine_fixture.npz"
    if not fixture.exists():
        return
    d = np.load(fixture, allow_pickle=True)
    lp = LinearProgram(
        objective=d["objective"],
        lhs=d["lhs"],
        senses=tuple(d["senses"]),
        rhs=d["rhs"],
        lower_bounds=d["lower_bounds"],
    )
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        sol = solve(lp)
        best = min(best, time.perf_counter() - t0)
    print()
    path = "numba" if _kernels.USING_NUMBA else "numpy"
    print(f"copula LP fixture ({lp.lhs.shape[0]} rows): {best:.4f}s on the {path} path,"
          f" {sol.pivots} pivots, cost {sol.objective_value:.12g}")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[8, 16, 24, 32])
    parser.add_argument("--sweep-sizes", type=int, nargs="+", default=[1000, 10000, 100000])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    if _kernels.simplex_core_numba is not None:
        # compile outside the timed region
        warm, warm_basis = build_transport_tableau(3, seed=1)
        _kernels.simplex_core_numba(warm, warm_basis, PIVOT_TOL, 10**6)
        xs = np.array([0.25, 0.75])
        w = np.array([0.5, 0.5])
        _kernels.monotone_sweep_numba(xs, w, xs, w)
    bench_simplex(args.sizes, args.repeat)
    bench_sweep(args.sweep_sizes, args.repeat)
    bench_end_to_end(args.repeat)


if __name__ == "__main__":
    main()
