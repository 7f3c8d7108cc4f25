"""
Monte Carlo checks for the tail bounds.

Dirichlet vectors are drawn as normalised Gamma variates. Shapes below one
use the boost ``Gamma(a) = Gamma(a + 1) * U^(1/a)`` carried out in log space,
so tiny shapes cannot underflow a whole row to zero.
"""
import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import DomainError
from .kinf import kinf, kinf_batch
from .special import _binary_kl

CHUNK = 1 << 17
DEFAULT_LEVEL = 0.99
BOUND_SLACK = 1e-9


class Verdict(str, enum.Enum):
    PASS = "PASS"
    INCONCLUSIVE = "INCONCLUSIVE"
    FAIL = "FAIL"


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream: int = 0

    def generator(self):
        return np.random.Generator(np.random.PCG64(
            np.random.SeedSequence(self.seed, spawn_key=(self.stream,))))


@dataclass(frozen=True)
class TailEstimate:
    p_hat: float
    n_samples: int
    ci_low: float
    ci_high: float
    level: float
    seed: int
    stream: int = 0

    def to_dict(self):
        return dict(self.__dict__)


def _log_gamma_draws(gen, shape, n):
    small = shape < 1.0
    boosted = np.where(small, shape + 1.0, shape)
    g = gen.standard_gamma(boosted, size=(n, shape.size))
    with np.errstate(divide="ignore"):
        out = np.log(g)
    if small.any():
        # log U / a; U drawn in (0, 1]
        v = 1.0 - gen.random((n, int(small.sum())))
        out[:, small] += np.log(v) / shape[small]
    return out


def _dirichlet_chunk(gen, weights, n):
    lg = _log_gamma_draws(gen, weights, n)
    lg -= lg.max(axis=1, keepdims=True)
    x = np.exp(lg)
    x /= x.sum(axis=1, keepdims=True)
    return x


def _check_weights(weights):
    weights = np.asarray(weights, dtype=np.float64)
    if weights.ndim != 1 or weights.size == 0:
        raise DomainError("weights must be a non-empty 1-d array")
    if not (weights > 0).all() or not np.isfinite(weights).all():
        raise DomainError("Dirichlet weights must be positive and finite")
    return weights


def sample_dirichlet(weights, rng, n):
    """``n`` draws from ``Dir(weights)`` as an ``(n, d)`` array."""
    weights = _check_weights(weights)
    if n < 0:
        raise DomainError("n must be non-negative")
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    parts = []
    done = 0
    while done < n:
        k = min(CHUNK, n - done)
        parts.append(_dirichlet_chunk(gen, weights, k))
        done += k
    if not parts:
        return np.empty((0, weights.size))
    return np.concatenate(parts)


def _iter_chunks(weights, rng, n):
    gen = rng.generator()
    done = 0
    while done < n:
        k = min(CHUNK, n - done)
        yield _dirichlet_chunk(gen, weights, k)
        done += k


def clopper_pearson(k, n, level=DEFAULT_LEVEL):
    """Exact two-sided binomial interval for ``k`` successes in ``n`` trials."""
    delta = 1.0 - level
    lo = 0.0 if k == 0 else float(stats.beta.ppf(delta / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(stats.beta.ppf(1 - delta / 2, k + 1, n - k))
    return lo, hi


def kl_interval(mean, n, level=DEFAULT_LEVEL, iters=100):
    """
    Two-sided Chernoff interval for the mean of ``[0, 1]``-valued samples.

    The limits solve ``kl(mean, q) = log(2/delta) / n`` on each side; valid for
    any bounded variable, not only Bernoulli ones.
    """
    radius = math.log(2.0 / (1.0 - level)) / n
    mean = min(max(mean, 0.0), 1.0)

    def solve(lo, hi, upper):
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            inside = _binary_kl(mean, mid) <= radius
            if inside == upper:
                lo = mid
            else:
                hi = mid
        return lo if upper else hi

    return solve(0.0, mean, False), solve(mean, 1.0, True)


def estimate_weighted_tail(weights, f, u, n, rng, level=DEFAULT_LEVEL):
    """Estimate ``P(sum_i X_i f_i >= u)`` for ``X ~ Dir(weights)``."""
    weights = _check_weights(weights)
    f = np.asarray(f, dtype=np.float64)
    if f.shape != weights.shape:
        raise DomainError("f must have one value per weight")
    if n < 1:
        raise DomainError("n must be at least 1")
    hits = 0
    for x in _iter_chunks(weights, rng, n):
        hits += int(np.count_nonzero(x @ f >= u))
    lo, hi = clopper_pearson(hits, n, level)
    return TailEstimate(p_hat=hits / n, n_samples=n, ci_low=lo, ci_high=hi,
                        level=level, seed=rng.seed, stream=rng.stream)


def verify_bound(estimate, bound, slack=BOUND_SLACK):
    """Compare a log-scale bound with the confidence interval of an estimate."""
    log_hi = math.log(estimate.ci_high) if estimate.ci_high > 0 else -math.inf
    log_lo = math.log(estimate.ci_low) if estimate.ci_low > 0 else -math.inf
    if log_hi <= bound + slack:
        return Verdict.PASS
    if log_lo > bound + slack:
        return Verdict.FAIL
    return Verdict.INCONCLUSIVE


@dataclass(frozen=True)
class PartitionCheck:
    verdict: Verdict
    mean: float
    ci_low: float
    ci_high: float
    rhs: float
    trivial_mean: float
    tail_fraction: float
    n_samples: int

    @property
    def gap(self):
        return self.rhs - self.mean

    @property
    def identity_holds(self):
        return self.trivial_mean == self.tail_fraction


def _check_partition(partition, d):
    cells = [np.asarray(sorted(c), dtype=np.intp) for c in partition]
    seen = np.concatenate(cells) if cells else np.empty(0, dtype=np.intp)
    if any(c.size == 0 for c in cells) or seen.size != d or set(seen.tolist()) != set(range(d)):
        raise DomainError("partition must split the support into disjoint non-empty cells")
    return cells


def _cell_values(x, f, cells, fmax):
    full = len(cells) == 1
    vals = np.empty((x.shape[0], len(cells)))
    for j, cell in enumerate(cells):
        if full:
            vals[:, j] = x @ f
            continue
        mass = x[:, cell].sum(axis=1)
        num = x[:, cell] @ f[cell]
        with np.errstate(invalid="ignore", divide="ignore"):
            vals[:, j] = np.where(mass > 0.0, num / mass, fmax)
    return vals


def partition_check(base, u, partition, n, rng, level=DEFAULT_LEVEL, slack=BOUND_SLACK):
    """
    Check ``E[exp(-alpha K_inf(cell weights, u, cell means of f under X))]
    <= exp(-alpha K_inf(nu0, u, f))`` for a fixed partition.

    The trivial one-cell partition is evaluated on the same samples; its
    average must equal the plain tail frequency.
    """
    weights = _check_weights(base.weights)
    f = base.f
    cells = _check_partition(partition, f.size)
    cell_nu = np.array([base.nu0[c].sum() for c in cells])
    fmax = float(f.max())
    t = float(base.alpha)
    total = 0.0
    trivial = 0.0
    hits = 0
    for x in _iter_chunks(weights, rng, n):
        k = kinf_batch(cell_nu, _cell_values(x, f, cells, fmax), u)
        total += float(np.exp(-t * k).sum())
        k1 = kinf_batch(np.ones(1), _cell_values(x, f, [np.arange(f.size)], fmax), u)
        trivial += float(np.exp(-t * k1).sum())
        hits += int(np.count_nonzero(x @ f >= u))
    mean = total / n
    lo, hi = kl_interval(mean, n, level)
    rhs = math.exp(-t * kinf(base.nu0, u, f))
    if hi <= rhs + slack:
        verdict = Verdict.PASS
    elif lo > rhs + slack:
        verdict = Verdict.FAIL
    else:
        verdict = Verdict.INCONCLUSIVE
    return PartitionCheck(verdict=verdict, mean=mean, ci_low=lo, ci_high=hi, rhs=rhs,
                          trivial_mean=trivial / n, tail_fraction=hits / n, n_samples=n)
