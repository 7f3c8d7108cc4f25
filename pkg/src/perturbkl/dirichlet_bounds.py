"""
Perturbed K_inf tail bounds for Dirichlet-weighted sums.

For ``X ~ Dir(alpha * nu0)`` on a finite support with values ``f``,

    log P(sum_i X_i f_i >= u) <= -(alpha - m) K_inf((alpha nu0 - eta) / (alpha - m), u, f)

where ``eta0 <= alpha nu0`` lives on ``{f > u}``, ``m`` is at most the
perturbation budget returned by :func:`max_perturbation_mass`, and ``eta`` is
``eta0`` filled up to mass ``m`` starting from the smallest values of ``f``.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from .beta_bounds import s_value
from .errors import (DomainError, InvalidSupportError, NoValidPlanError,
                     PerturbationTooLargeError)
from .kinf import kinf

log = logging.getLogger(__name__)

_TOL = 1e-12
STRATEGIES = ("argmax-only", "all-above-u", "top-k", "search")


@dataclass(frozen=True)
class BaseMeasure:
    """Concentration ``alpha``, base probability vector ``nu0`` and values ``f``."""

    alpha: float
    nu0: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        nu0 = np.asarray(self.nu0, dtype=np.float64)
        f = np.asarray(self.f, dtype=np.float64)
        object.__setattr__(self, "nu0", nu0)
        object.__setattr__(self, "f", f)
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if nu0.ndim != 1 or nu0.shape != f.shape:
            raise DomainError("nu0 and f must be 1-d arrays of equal length")
        if nu0.size < 2:
            raise DomainError("support needs at least two points")
        if (nu0 < 0).any() or abs(nu0.sum() - 1.0) > _TOL * nu0.size:
            raise DomainError("nu0 must be a probability vector")
        if not np.isfinite(f).all():
            raise DomainError("f must be finite")

    @property
    def weights(self):
        return self.alpha * self.nu0

    @property
    def d(self):
        return self.nu0.size


@dataclass(frozen=True)
class PerturbationPlan:
    eta0: np.ndarray
    m: float
    eta: np.ndarray
    strategy: str = "manual"

    def to_dict(self):
        return {"strategy": self.strategy, "eta0": self.eta0.tolist(), "m": self.m,
                "eta": self.eta.tolist()}


def transformed_threshold(f, eta0, u):
    """``(u - f_min)^+ / (min_{supp eta0} f - u + (u - f_min)^+)``."""
    f = np.asarray(f, dtype=np.float64)
    eta0 = np.asarray(eta0, dtype=np.float64)
    gap = max(u - f.min(), 0.0)
    floor = f[eta0 > 0].min()
    return gap / (floor - u + gap)


def _check_eta0(base, eta0, u):
    eta0 = np.asarray(eta0, dtype=np.float64)
    if eta0.shape != base.f.shape:
        raise DomainError("eta0 must have one entry per support point")
    if (eta0 < 0).any():
        raise DomainError("eta0 must be non-negative")
    cap = base.weights
    if (eta0 > cap * (1 + _TOL) + _TOL).any():
        raise DomainError("eta0 must not exceed alpha * nu0")
    if (base.f[eta0 > 0] <= u).any():
        raise InvalidSupportError("eta0 puts mass where f <= u")
    return eta0


def max_perturbation_mass(base, eta0, u):
    """
    Largest admissible mass ``m`` for the region ``eta0``.

    This is ``min(S(eta0 total, alpha - eta0 total, u'), eta0 total)`` with
    ``u'`` from :func:`transformed_threshold`. Requires ``eta0 total < alpha``.
    """
    eta0 = _check_eta0(base, eta0, u)
    mass = float(eta0.sum())
    if mass == 0.0:
        return 0.0
    if mass >= base.alpha * (1 - _TOL):
        raise DomainError("eta0 total must stay below alpha")
    u_t = transformed_threshold(base.f, eta0, u)
    return min(s_value(mass, base.alpha - mass, min(max(u_t, 0.0), 1.0)), mass)


def build_eta(eta0, m, f):
    """
    Fill ``eta0`` up to total mass ``m``, lowest ``f`` first.

    Ties in ``f`` are broken by support index. The result minimises
    ``sum(mu * f)`` over ``mu <= eta0`` with ``sum(mu) = m``.
    """
    eta0 = np.asarray(eta0, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    total = eta0.sum()
    if m < 0 or m > total * (1 + _TOL) + _TOL:
        raise DomainError(f"m={m} must lie in [0, {total}]")
    eta = np.zeros_like(eta0)
    left = float(m)
    for i in np.argsort(f, kind="stable"):
        if left <= 0.0:
            break
        take = min(eta0[i], left)
        eta[i] = take
        left -= take
    return eta


def plan_from_eta0(base, eta0, u, m=None, strategy="manual"):
    """Plan for a given region; ``m`` defaults to the full budget."""
    eta0 = _check_eta0(base, eta0, u)
    budget = max_perturbation_mass(base, eta0, u)
    if m is None:
        m = budget
    elif m > budget * (1 + _TOL) + _TOL:
        raise PerturbationTooLargeError(f"m={m} exceeds the budget {budget}")
    return PerturbationPlan(eta0=eta0, m=float(m), eta=build_eta(eta0, m, base.f),
                            strategy=strategy)


def zero_plan(base, strategy="none"):
    z = np.zeros(base.d)
    return PerturbationPlan(eta0=z, m=0.0, eta=z.copy(), strategy=strategy)


def dp_tail_bound(base, u, plan, check=True):
    """``-(alpha - m) K_inf((alpha nu0 - eta) / (alpha - m), u, f)``."""
    u = float(u)
    m = float(plan.m)
    eta = np.asarray(plan.eta, dtype=np.float64)
    if check and m > 0.0:
        budget = max_perturbation_mass(base, plan.eta0, u)
        if m > budget * (1 + _TOL) + _TOL:
            raise PerturbationTooLargeError(f"m={m} exceeds the budget {budget}")
        if (eta > plan.eta0 * (1 + _TOL) + _TOL).any() or abs(eta.sum() - m) > _TOL * max(1.0, m):
            raise DomainError("eta must satisfy eta <= eta0 and total m")
    rest = base.alpha - m
    if not rest > 0:
        raise DomainError("alpha - m must be positive")
    nu = np.clip(base.weights - eta, 0.0, None)
    nu = nu / nu.sum()
    k = kinf(nu, u, base.f)
    if k == 0.0:
        return 0.0
    return -rest * k


def _region(base, idx):
    eta0 = np.zeros(base.d)
    eta0[idx] = base.weights[idx]
    return eta0


def _plan_or_zero(base, eta0, u, strategy):
    if eta0.sum() == 0.0:
        return zero_plan(base, strategy)
    if eta0.sum() >= base.alpha * (1 - _TOL):
        # every weighted point sits above u, so the tail is trivial and the
        # unperturbed bound is already 0
        log.debug("region for %s carries all of alpha; using m = 0", strategy)
        return PerturbationPlan(eta0=eta0, m=0.0, eta=np.zeros(base.d), strategy=strategy)
    return plan_from_eta0(base, eta0, u, strategy=strategy)


def candidate_plans(base, u):
    """One plan per prefix of the support sorted by ``f`` descending (``f > u`` only)."""
    above = np.flatnonzero(base.f > u)
    order = above[np.lexsort((above, -base.f[above]))]
    return [_plan_or_zero(base, _region(base, order[:j]), u, f"top-{j}")
            for j in range(1, order.size + 1)]


def auto_plan(base, u, strategy="search", k=None):
    """
    Build a plan by strategy.

    ``argmax-only`` perturbs the maximisers of ``f``; ``all-above-u`` every
    point with ``f > u``; ``top-k`` the ``k`` largest values; ``search`` tries
    every prefix of the support ordered by decreasing ``f`` and keeps the
    smallest bound (first one on ties).
    """
    u = float(u)
    above = np.flatnonzero(base.f > u)
    if above.size == 0:
        raise NoValidPlanError(f"no support point has f > u={u}")
    if strategy == "argmax-only":
        idx = np.flatnonzero(base.f == base.f.max())
    elif strategy == "all-above-u":
        idx = above
    elif strategy == "top-k":
        if k is None or k < 1:
            raise DomainError("top-k needs k >= 1")
        idx = above[np.lexsort((above, -base.f[above]))][:k]
    elif strategy == "search":
        best, best_val = None, math.inf
        for plan in candidate_plans(base, u):
            val = dp_tail_bound(base, u, plan, check=False)
            if best is None or val < best_val:
                best, best_val = plan, val
        return PerturbationPlan(best.eta0, best.m, best.eta, strategy="search")
    else:
        raise DomainError(f"unknown strategy {strategy!r}")
    name = strategy if strategy != "top-k" else f"top-{k}"
    return _plan_or_zero(base, _region(base, idx), u, name)
