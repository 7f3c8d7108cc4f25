#!/usr/bin/env python
"""
Compare the numba kernels with the pure numpy / Python fallbacks.

    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --rows 200000 --repeat 5 --output bench.json

The fallbacks are the same functions run uncompiled (``py_func``) or the
vectorised numpy bisection used when ``PERTURBKL_DISABLE_NUMBA=1``.
"""
import argparse
import json
import platform
import time

import numpy as np

from perturbkl._accel import NUMBA_ENABLED
from perturbkl.kinf import _kinf_batch_loop, kinf_batch_numpy
from perturbkl.special import _log_beta_upper, _log_beta_upper_many


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_kinf(rows, d, repeat, rng):
    nu = rng.dirichlet(np.ones(d))
    values = rng.uniform(0, 1, (rows, d))
    u = 0.6
    _kinf_batch_loop(nu, values[:10], u)
    fast = best_of(lambda: _kinf_batch_loop(nu, values, u), repeat)
    slow = best_of(lambda: kinf_batch_numpy(nu, values, u), repeat)
    x, y = _kinf_batch_loop(nu, values, u), kinf_batch_numpy(nu, values, u)
    if not np.array_equal(np.isinf(x), np.isinf(y)):
        raise AssertionError("numba and numpy disagree on infinite rows")
    finite = np.isfinite(x)
    diff = np.max(np.abs(x[finite] - y[finite]), initial=0.0)
    return {"kernel": f"kinf_batch d={d}", "n": rows, "numba_s": fast, "fallback_s": slow,
            "max_abs_diff": float(diff)}


def bench_beta_tail(n, repeat, rng):
    a = rng.uniform(0.2, 50, n)
    b = rng.uniform(0.2, 50, n)
    u = rng.uniform(0, 1, n)
    py = getattr(_log_beta_upper, "py_func", _log_beta_upper)

    def fallback():
        return np.fromiter((py(*t) for t in zip(a, b, u)), float, n)

    _log_beta_upper_many(a[:10], b[:10], u[:10])
    fast = best_of(lambda: _log_beta_upper_many(a, b, u), repeat)
    slow = best_of(fallback, repeat)
    diff = np.max(np.abs(_log_beta_upper_many(a, b, u) - fallback()))
    return {"kernel": "log_beta_tail", "n": n, "numba_s": fast, "fallback_s": slow,
            "max_abs_diff": float(diff)}


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n")[1])
    p.add_argument("--rows", type=int, default=100_000)
    p.add_argument("--tails", type=int, default=20_000)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    args = p.parse_args()

    if not NUMBA_ENABLED:
        raise SystemExit("numba is disabled or missing; nothing to compare")
    rng = np.random.default_rng(args.seed)
    results = [bench_kinf(args.rows, d, args.repeat, rng) for d in (2, 3, 5)]
    results.append(bench_beta_tail(args.tails, args.repeat, rng))

    print(f"{'kernel':<18}{'n':>9}{'numba [s]':>12}{'fallback [s]':>14}{'speedup':>9}{'max diff':>11}")
    for r in results:
        speedup = r["fallback_s"] / r["numba_s"]
        print(f"{r['kernel']:<18}{r['n']:>9}{r['numba_s']:>12.4f}{r['fallback_s']:>14.4f}"
              f"{speedup:>8.1f}x{r['max_abs_diff']:>11.1e}")

    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump({"python": platform.python_version(), "results": results}, fh, indent=2)


if __name__ == "__main__":
    main()
