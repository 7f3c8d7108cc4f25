import math

import numpy as np
import pytest
from scipy import stats

from perturbkl.dirichlet_bounds import BaseMeasure
from perturbkl.errors import DomainError
from perturbkl.mc import (PartitionCheck, RngStream, TailEstimate, Verdict, clopper_pearson,
                          estimate_weighted_tail, kl_interval, partition_check, sample_dirichlet,
                          verify_bound)
from perturbkl.special import beta_tail_exact, binary_kl

# two-sided asymptotic KS critical value at level 1e-3
KS_COEF = math.sqrt(-0.5 * math.log(0.5e-3))


def est(lo, hi, p=None):
    p = 0.5 * (lo + hi) if p is None else p
    return TailEstimate(p_hat=p, n_samples=100, ci_low=lo, ci_high=hi, level=0.99, seed=0)


class TestSampling:
    def test_rows_sum_to_one(self):
        x = sample_dirichlet([0.05, 0.3, 2.0, 7.0], RngStream(1), 50_000)
        assert x.shape == (50_000, 4)
        assert np.abs(x.sum(axis=1) - 1).max() <= 1e-12
        assert (x >= 0).all()

    def test_determinism(self):
        a = sample_dirichlet([0.5, 1.5, 3.0], RngStream(7, 2), 1000)
        b = sample_dirichlet([0.5, 1.5, 3.0], RngStream(7, 2), 1000)
        c = sample_dirichlet([0.5, 1.5, 3.0], RngStream(7, 3), 1000)
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c)

    @pytest.mark.parametrize("a,b", [(1, 1), (0.3, 0.7), (0.5, 5), (2, 3), (10, 1), (0.1, 0.1),
                                     (4, 4), (1.5, 0.5), (25, 40), (0.8, 12)])
    def test_beta_marginal(self, a, b):
        n = 100_000
        xy = sample_dirichlet([a, b], RngStream(11), n)
        x = xy[:, 0]
        qs = np.quantile(x, np.linspace(0.025, 0.975, 20))
        emp = np.array([(x >= q).mean() for q in qs])
        exact = np.array([beta_tail_exact(a, b, q) for q in qs])
        assert np.abs(emp - exact).max() <= KS_COEF / math.sqrt(n)
        # the coordinate near 1 rounds to 1.0 for small shapes, so run the full
        # KS test on the smaller coordinate, whose law is known exactly
        first, second = stats.beta(a, b), stats.beta(b, a)
        low = xy.min(axis=1)
        assert stats.kstest(low, lambda t: first.cdf(t) + second.cdf(t)).pvalue > 1e-3

    def test_uniform_marginal(self):
        x = sample_dirichlet([1, 1], RngStream(3), 100_000)[:, 0]
        assert stats.kstest(x, "uniform").pvalue > 1e-3

    def test_mean(self):
        w = np.array([2.0, 3.0, 5.0])
        n = 200_000
        x = sample_dirichlet(w, RngStream(5), n)
        mean = w / w.sum()
        sd = np.sqrt(mean * (1 - mean) / (w.sum() + 1) / n)
        assert (np.abs(x.mean(axis=0) - mean) <= 3 * sd).all()

    def test_tiny_shapes_do_not_underflow(self):
        x = sample_dirichlet([1e-3, 1e-3], RngStream(9), 10_000)
        assert np.isfinite(x).all()
        assert np.abs(x.sum(axis=1) - 1).max() <= 1e-12

    @pytest.mark.parametrize("w", [[0.0, 1.0], [-1.0, 2.0], [], [np.inf, 1.0]])
    def test_bad_weights(self, w):
        with pytest.raises(DomainError):
            sample_dirichlet(w, RngStream(0), 10)

    def test_zero_draws(self):
        assert sample_dirichlet([1.0, 2.0], RngStream(0), 0).shape == (0, 2)


class TestTailEstimate:
    def test_constant_f(self):
        hit = estimate_weighted_tail([1.0, 2.0], [0.5, 0.5], 0.4, 1000, RngStream(0))
        miss = estimate_weighted_tail([1.0, 2.0], [0.5, 0.5], 0.6, 1000, RngStream(0))
        assert hit.p_hat == 1.0 and miss.p_hat == 0.0

    def test_beta_case(self):
        e = estimate_weighted_tail([2.0, 3.0], [1.0, 0.0], 0.6, 200_000, RngStream(4))
        assert e.ci_low <= beta_tail_exact(2, 3, 0.6) <= e.ci_high
        assert e.ci_low <= e.p_hat <= e.ci_high

    def test_determinism(self):
        args = ([0.5, 1.0, 2.0], [1.0, 0.3, 0.0], 0.5, 300_000)
        assert estimate_weighted_tail(*args, RngStream(8)) == estimate_weighted_tail(*args, RngStream(8))

    def test_n_zero(self):
        with pytest.raises(DomainError):
            estimate_weighted_tail([1.0, 1.0], [1.0, 0.0], 0.5, 0, RngStream(0))

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            estimate_weighted_tail([1.0, 1.0], [1.0, 0.0, 0.5], 0.5, 10, RngStream(0))


class TestIntervals:
    def test_clopper_pearson_edges(self):
        assert clopper_pearson(0, 100)[0] == 0.0
        assert clopper_pearson(100, 100)[1] == 1.0
        # k = 0: the upper limit solves (1 - p)^n = delta / 2
        assert clopper_pearson(0, 100, 0.99)[1] == pytest.approx(1 - 0.005 ** (1 / 100), rel=1e-10)

    def test_clopper_pearson_coverage_definition(self):
        lo, hi = clopper_pearson(30, 100, 0.99)
        assert stats.binom.sf(29, 100, lo) == pytest.approx(0.005, rel=1e-8)
        assert stats.binom.cdf(30, 100, hi) == pytest.approx(0.005, rel=1e-8)

    def test_kl_interval(self):
        lo, hi = kl_interval(0.3, 1000, 0.99)
        radius = math.log(2 / 0.01) / 1000
        assert lo < 0.3 < hi
        assert binary_kl(0.3, lo) == pytest.approx(radius, rel=1e-9)
        assert binary_kl(0.3, hi) == pytest.approx(radius, rel=1e-9)
        assert kl_interval(0.0, 1000)[0] == 0.0


class TestVerify:
    def test_examples(self):
        assert verify_bound(est(0.05, 0.1), math.log(0.25)) is Verdict.PASS
        assert verify_bound(est(0.3, 0.4), math.log(0.25)) is Verdict.FAIL
        assert verify_bound(est(0.2, 0.3), math.log(0.25)) is Verdict.INCONCLUSIVE

    def test_empty_estimate(self):
        assert verify_bound(est(0.0, 0.0), -math.inf) is Verdict.PASS
        assert verify_bound(est(0.0, 0.01), -math.inf) is Verdict.INCONCLUSIVE


class TestPartition:
    base = BaseMeasure(3.0, [0.3, 0.3, 0.4], [1.0, 0.6, 0.1])

    def test_trivial_identity(self):
        chk = partition_check(self.base, 0.7, [[0, 1, 2]], 200_000, RngStream(1))
        tail = estimate_weighted_tail(self.base.weights, self.base.f, 0.7, 200_000, RngStream(1))
        assert chk.identity_holds
        assert chk.mean == chk.trivial_mean == tail.p_hat
        assert chk.verdict is not Verdict.FAIL

    @pytest.mark.parametrize("partition", [[[0], [1], [2]], [[0, 2], [1]], [[1, 2], [0]]])
    def test_inequality(self, partition):
        chk = partition_check(self.base, 0.7, partition, 200_000, RngStream(2))
        assert isinstance(chk, PartitionCheck)
        assert chk.verdict is not Verdict.FAIL
        assert chk.identity_holds

    def test_singleton_attains(self):
        # with one support point per cell the cell values are f itself
        chk = partition_check(self.base, 0.7, [[0], [1], [2]], 10_000, RngStream(2))
        assert chk.mean == pytest.approx(chk.rhs, rel=1e-12)
        assert abs(chk.gap) <= 1e-12 * chk.rhs

    def test_two_points(self):
        base = BaseMeasure(2.0, [0.4, 0.6], [0.9, 0.2])
        for partition in ([[0, 1]], [[0], [1]]):
            chk = partition_check(base, 0.7, partition, 100_000, RngStream(3))
            assert chk.verdict is not Verdict.FAIL

    @pytest.mark.parametrize("partition", [[[0, 1]], [[0, 1], [1, 2]], [[0], [], [1, 2]],
                                           [[0], [1], [2], [3]]])
    def test_invalid(self, partition):
        with pytest.raises(DomainError):
            partition_check(self.base, 0.7, partition, 100, RngStream(0))
