"""
Acceptance criteria, one test per criterion.

Each test records a single PASS/FAIL line; the lines are printed at the end of
the pytest run and when this file is executed directly.
"""
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from perturbkl.beta_bounds import (bound_report, classic_eta, perturbation_residual,
                                   perturbed_kl_bound, s_lower_bounds, s_value,
                                   s_value_bisect, s_value_lambert)
from perturbkl.dirichlet_bounds import (BaseMeasure, auto_plan, dp_tail_bound,
                                        plan_from_eta0)
from perturbkl.kinf import (binary_kinf_threshold, kinf, kinf_brute_force,
                            kinf_dual_derivative, kinf_solve)
from perturbkl.mc import (RngStream, Verdict, estimate_weighted_tail, partition_check,
                          verify_bound)
from perturbkl.special import binary_kl, log_beta_tail_exact

SHAPES = (0.5, 1.0, 1.5, 2.0, 5.0, 10.0)
A_ABOVE_ONE = tuple(a for a in SHAPES if a > 1)
MC_SAMPLES = 1_000_000
SEED = 20240611

RESULTS = []


def record(num, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num:>2}: {title} ({detail})"
    RESULTS.append(line)
    return ok


def thresholds(a, b, n):
    return np.linspace(a / (a + b), 0.999, n)


def s_grid():
    return [(a, b, u) for a in A_ABOVE_ONE for b in SHAPES for u in thresholds(a, b, 25)]


def test_bound_validity_sweep():
    t0 = time.perf_counter()
    worst, checked = -math.inf, 0
    for a in SHAPES:
        for b in SHAPES:
            for u in thresholds(a, b, 19):
                exact = log_beta_tail_exact(a, b, u)
                classic = bound_report(a, b, u, "classic")
                maximal = bound_report(a, b, u, "maximal")
                rows = [(classic.bounds[k], classic.valid[k]) for k in ("hoeffding", "bernstein", "kl")]
                rows += [(classic.bounds["perturbed"], classic.valid["perturbed"]),
                         (maximal.bounds["perturbed"], maximal.valid["perturbed"])]
                for value, ok in rows:
                    if ok:
                        checked += 1
                        worst = max(worst, exact - value)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 5.0
    assert record(1, "bound validity sweep", ok,
                  f"{checked} valid bounds, max(exact - bound) = {worst:.3e}, {elapsed:.2f} s")


def test_s_root_residual():
    grid = s_grid()
    t0 = time.perf_counter()
    residual = agree = 0.0
    for a, b, u in grid:
        if u >= 1.0:
            continue
        s = s_value(a, b, u)
        residual = max(residual, abs(perturbation_residual(a, b, s, u)))
        agree = max(agree, abs(s_value_lambert(a, b, u) - s_value_bisect(a, b, u)))
    elapsed = time.perf_counter() - t0
    ok = len(grid) >= 500 and residual <= 1e-9 and agree <= 1e-9 and elapsed < 1.0
    assert record(2, "S root residual", ok,
                  f"{len(grid)} points, |R| <= {residual:.2e}, lambert vs bisection "
                  f"{agree:.2e}, {elapsed:.2f} s")


def test_lower_bound_chain():
    slack = math.inf
    for a, b, u in s_grid():
        s = s_value(a, b, u)
        lb1, lb2, lb3 = s_lower_bounds(a, b, u)
        assert lb3 == 1 + (a - 1) / (b + 1)
        slack = min(slack, s - lb1, lb1 - lb2, lb2 - lb3)
    limit = 0.0
    for a in A_ABOVE_ONE:
        for b in SHAPES:
            at_one = s_value(a, b, 1.0)
            near = (s_value(a, b, 1 - 1e-8), *s_lower_bounds(a, b, 1 - 1e-8))
            limit = max(limit, max(abs(v - at_one) for v in near))
    ok = slack >= -1e-12 and limit <= 1e-5
    assert record(3, "lower-bound chain", ok,
                  f"min slack {slack:.2e}, max gap to u=1 case {limit:.2e}")


def test_monotone_improvement():
    rise = -math.inf
    maximal_gap = -math.inf
    for a in SHAPES:
        for b in SHAPES:
            for u in thresholds(a, b, 19):
                s = s_value(a, b, u)
                vals = [perturbed_kl_bound(a, b, u, eta) for eta in np.linspace(0, s, 50)
                        if u > (a - eta) / (a + b - eta)]
                if len(vals) > 1:
                    rise = max(rise, max(y - x for x, y in zip(vals, vals[1:])))
                if a > 1:
                    gap = perturbed_kl_bound(a, b, u, s) - perturbed_kl_bound(a, b, u, classic_eta(a, b))
                    if not math.isnan(gap):
                        maximal_gap = max(maximal_gap, gap)
    ok = rise <= 1e-12 and maximal_gap <= 1e-12
    assert record(4, "monotone improvement in eta", ok,
                  f"max step increase {rise:.2e}, max(maximal - classic) {maximal_gap:.2e}")


def test_s_monotonicity():
    us = np.linspace(0.005, 0.995, 100)
    worst_u = worst_a = -math.inf
    for total in (2.5, 6.0, 15.0):
        a_vals = np.linspace(0.5, total - 0.05, 100)
        table = np.array([[s_value(a, total - a, u) for u in us] for a in a_vals])
        worst_u = max(worst_u, np.diff(table, axis=1).max())
        worst_a = max(worst_a, -np.diff(table, axis=0).min())
    ok = worst_u <= 1e-12 and worst_a <= 1e-12
    assert record(5, "monotonicity of S", ok,
                  f"max increase along u {worst_u:.2e}, max decrease along a {worst_a:.2e}")


def test_kinf_duality():
    rng = np.random.default_rng(SEED)
    res = 1000
    tol = max(1e-3, 2 / res)
    t0 = time.perf_counter()
    gap = cert = 0.0
    for _ in range(50):
        d = int(rng.integers(2, 5))
        nu = rng.dirichlet(np.ones(d))
        f = rng.uniform(0, 1, d)
        u = rng.uniform(nu @ f, f.max())
        sol = kinf_solve(nu, u, f)
        gap = max(gap, abs(sol.value - kinf_brute_force(nu, u, f, res)))
        if sol.lam < (1 - 1e-12) / (f.max() - u):
            cert = max(cert, abs(kinf_dual_derivative(nu, u, f, sol.lam)))
        else:
            cert = max(cert, max(-sol.derivative, 0.0))
    binary = 0.0
    for _ in range(200):
        v, w = np.sort(rng.uniform(0, 1, 2))[::-1]
        u = rng.uniform(w, v)
        thr = binary_kinf_threshold(u, v, w, v, w)
        p = rng.uniform(0, thr)
        binary = max(binary, abs(kinf([p, 1 - p], u, [v, w]) - binary_kl(p, thr)))
    elapsed = time.perf_counter() - t0
    ok = gap <= tol and binary <= 1e-9 and cert <= 1e-8 and elapsed < 30
    assert record(6, "K_inf duality", ok,
                  f"oracle gap {gap:.2e} (tol {tol:.0e}), binary {binary:.2e}, "
                  f"certificate {cert:.2e}, {elapsed:.1f} s")


def random_base(rng, d):
    return BaseMeasure(rng.uniform(0.5, 20), rng.dirichlet(np.ones(d)), rng.uniform(0, 1, d))


@pytest.mark.slow
def test_dirichlet_domination():
    rng = np.random.default_rng(SEED + 7)
    t0 = time.perf_counter()
    verdicts = {v: 0 for v in Verdict}
    for i in range(30):
        base = random_base(rng, int(rng.integers(2, 6)))
        u = rng.uniform(base.nu0 @ base.f, base.f.max())
        est = estimate_weighted_tail(base.weights, base.f, u, MC_SAMPLES, RngStream(SEED, i),
                                     level=0.99)
        for strategy in ("argmax-only", "all-above-u", "search"):
            bound = dp_tail_bound(base, u, auto_plan(base, u, strategy))
            verdicts[verify_bound(est, bound)] += 1
    elapsed = time.perf_counter() - t0
    ok = verdicts[Verdict.FAIL] == 0 and elapsed < 120
    summary = ", ".join(f"{k.value} {n}" for k, n in verdicts.items())
    assert record(7, "Dirichlet bound domination", ok, f"{summary}, {elapsed:.1f} s")


def test_two_point_reduction():
    rng = np.random.default_rng(SEED + 8)
    worst = 0.0
    for _ in range(100):
        alpha, p = rng.uniform(0.5, 20), rng.uniform(0.02, 0.98)
        v, w = np.sort(rng.uniform(0, 1, 2))[::-1]
        u = rng.uniform(w, v)
        base = BaseMeasure(alpha, [p, 1 - p], [v, w])
        plan = plan_from_eta0(base, [alpha * p, 0.0], u)
        thr = binary_kinf_threshold(u, v, w)
        beta = perturbed_kl_bound(alpha * p, alpha * (1 - p), thr, plan.m, strict=False)
        worst = max(worst, abs(dp_tail_bound(base, u, plan) - beta))
    assert record(8, "two-point reduction to Beta", worst <= 1e-9, f"max diff {worst:.2e}")


@pytest.mark.slow
def test_partition_inequality():
    rng = np.random.default_rng(SEED + 9)
    t0 = time.perf_counter()
    fails = checks = 0
    identity = True
    max_singleton_gap = 0.0
    for i in range(10):
        base = random_base(rng, 3)
        u = rng.uniform(base.nu0 @ base.f, base.f.max())
        cut = rng.permutation(3)
        k = int(rng.integers(1, 3))
        random_cells = [sorted(cut[:k].tolist()), sorted(cut[k:].tolist())]
        stream = RngStream(SEED, 100 + i)
        tail = estimate_weighted_tail(base.weights, base.f, u, MC_SAMPLES, stream)
        for partition in ([[0, 1, 2]], [[0], [1], [2]], random_cells):
            chk = partition_check(base, u, partition, MC_SAMPLES, stream)
            checks += 1
            fails += chk.verdict is Verdict.FAIL
            identity &= chk.identity_holds and chk.trivial_mean == tail.p_hat
            if len(partition) == 3:
                max_singleton_gap = max(max_singleton_gap, abs(chk.gap))
    elapsed = time.perf_counter() - t0
    ok = fails == 0 and identity
    assert record(9, "partition inequality", ok,
                  f"{checks} checks, {fails} FAIL, trivial identity exact: {identity}, "
                  f"max singleton gap {max_singleton_gap:.1e}, {elapsed:.1f} s")


def _cli(*argv):
    return subprocess.run([sys.executable, "-m", "perturbkl", *argv], capture_output=True,
                          check=True).stdout


def test_determinism(tmp_path):
    nu0 = tmp_path / "nu0.json"
    f = tmp_path / "f.json"
    nu0.write_text("[0.2, 0.3, 0.5]")
    f.write_text("[1.0, 0.6, 0.1]")
    commands = [
        ("sweep", "--param", "u", "--from", "0.5", "--to", "0.99", "--steps", "50",
         "--a", "2", "--b", "3"),
        ("sweep", "--param", "a", "--from", "1.1", "--to", "5.5", "--steps", "30",
         "--u", "0.8", "--fix-sum", "6"),
        ("verify", "beta", "--a", "2", "--b", "3", "--u", "0.7", "--samples", "200000",
         "--seed", "5", "--json"),
        ("verify", "dp", "--alpha", "4", "--nu0", str(nu0), "--f", str(f), "--u", "0.7",
         "--samples", "200000", "--seed", "5"),
    ]
    same = [_cli(*cmd) == _cli(*cmd) for cmd in commands]
    assert record(10, "determinism", all(same),
                  f"{sum(same)}/{len(same)} commands byte-identical")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
