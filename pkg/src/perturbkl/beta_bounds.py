"""
Exponential upper bounds on ``log P(X >= u)`` for ``X ~ Beta(a, b)``.

Besides the Hoeffding, Bernstein and KL bounds, this module implements the
perturbed KL bound ``-(a+b-eta) kl((a-eta)/(a+b-eta), u)`` together with the
largest admissible perturbation ``S(a, b, u)`` and its explicit lower bounds.

Lower-tail bounds follow by reflection: ``P(X <= u)`` for ``Beta(a, b)`` is
``P(Y >= 1-u)`` for ``Y ~ Beta(b, a)``.
"""
import math
from dataclasses import dataclass, field

from .errors import DomainError, PerturbationTooLargeError, ValidityError
from .special import _binary_kl, _lambert_w0_exp, log_beta_tail_exact

# slack used when comparing a user eta with S(a, b, u) or u with a mean
_REL_TOL = 1e-12

BOUND_NAMES = ("hoeffding", "bernstein", "kl", "perturbed")


@dataclass(frozen=True)
class BetaParams:
    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise DomainError(f"Beta shapes must be positive, got a={self.a}, b={self.b}")

    @property
    def mean(self):
        return self.a / (self.a + self.b)


def _check(a, b, u):
    a, b, u = float(a), float(b), float(u)
    if not (a > 0.0 and b > 0.0):
        raise DomainError(f"Beta shapes must be positive, got a={a}, b={b}")
    if not 0.0 <= u <= 1.0:
        raise DomainError(f"threshold must lie in [0, 1], got u={u}")
    return a, b, u


def _require_above_mean(a, b, u, strict):
    if strict and u < a / (a + b) - _REL_TOL:
        raise ValidityError(f"u={u} lies below the mean {a / (a + b)} of Beta({a}, {b})")


def hoeffding_bound(a, b, u, strict=True):
    """Sub-Gaussian bound ``-2(a+b+1)(u - a/(a+b))^2``."""
    a, b, u = _check(a, b, u)
    _require_above_mean(a, b, u, strict)
    return 0.0 - 2.0 * (a + b + 1.0) * (u - a / (a + b)) ** 2


def bernstein_bound(a, b, u, strict=True):
    """Bernstein-type bound with the ``(b-a)^+`` skewness correction."""
    a, b, u = _check(a, b, u)
    _require_above_mean(a, b, u, strict)
    dev = (a + b) * u - a
    if dev == 0.0:
        return 0.0
    denom = 2.0 * a * b / (a + b + 1.0) + 4.0 * dev * max(b - a, 0.0) / (3.0 * (a + b + 2.0))
    return -dev * dev / denom


def kl_bound(a, b, u, strict=True):
    """``-(a+b) kl(a/(a+b), u)``."""
    a, b, u = _check(a, b, u)
    _require_above_mean(a, b, u, strict)
    return 0.0 - (a + b) * _binary_kl(a / (a + b), u)


def perturbation_residual(a, b, eta, u):
    """
    Residual ``R(eta, u) = (u b - (1-u)(a-eta)) / b * u^(-eta) - 1``.

    ``R <= 0`` exactly when the perturbation ``eta`` is admissible at ``u``.
    """
    a, b, eta, u = float(a), float(b), float(eta), float(u)
    if not 0.0 < u < 1.0:
        raise DomainError(f"perturbation_residual needs u in (0, 1), got {u}")
    if eta < 0.0:
        raise DomainError(f"eta must be non-negative, got {eta}")
    return (u * b - (1.0 - u) * (a - eta)) / b * u ** (-eta) - 1.0


def _log_residual(a, b, eta, u):
    # log(1 + R) written through c = 1 - u so that both terms keep relative
    # precision as u -> 1, where each is O(c) and they cancel at the root
    c = 1.0 - u
    x = c * (a + b - eta) / b
    if x >= 1.0:
        return -math.inf
    return math.log1p(-x) - eta * math.log1p(-c)


def _root_bracket(a, b, u):
    # 1 + R is non-positive left of lo and log(1 + R) = (a-1) log(1/u) > 0 at eta = a
    return max(0.0, a - u * b / (1.0 - u)), a


def s_value_lambert(a, b, u):
    """
    Closed-form ``S(a, b, u)`` for ``a > 1``, ``u`` in ``(0, 1)``.

    The Lambert argument is handled in log space so it cannot overflow, but
    the final sum cancels catastrophically as ``u -> 1``; prefer
    :func:`s_value`, which polishes this estimate.
    """
    a, b, u = _check(a, b, u)
    if not (a > 1.0 and 0.0 < u < 1.0):
        raise DomainError("closed form applies to a > 1 and u in (0, 1)")
    log_inv_u = -math.log(u)
    shift = b * u / (1.0 - u)
    log_arg = math.log(b) - (a - shift) * log_inv_u + math.log(log_inv_u) - math.log1p(-u)
    return a - shift + _lambert_w0_exp(log_arg) / log_inv_u


def s_value_bisect(a, b, u, tol=1e-14, max_iter=200):
    """``S(a, b, u)`` by bisection on ``log(1 + R)`` over its root bracket."""
    a, b, u = _check(a, b, u)
    if not (a > 1.0 and 0.0 < u < 1.0):
        raise DomainError("bisection applies to a > 1 and u in (0, 1)")
    lo, hi = _root_bracket(a, b, u)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= tol * max(1.0, hi):
            break
        if _log_residual(a, b, mid, u) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _polish(a, b, u, eta):
    # safeguarded Newton on log(1 + R), which is increasing and concave in eta
    log_inv_u = -math.log(u)
    lo, hi = _root_bracket(a, b, u)
    if not lo < hi:
        # u so small that a - u b / (1 - u) rounds to a
        return lo
    if not lo < eta < hi:
        eta = 0.5 * (lo + hi)
    c = 1.0 - u
    for _ in range(100):
        g = _log_residual(a, b, eta, u)
        if g < 0.0:
            lo = eta
        elif g > 0.0:
            hi = eta
        else:
            return eta
        denom = b - c * (a + b - eta)
        nxt = eta - g / (c / denom + log_inv_u) if denom > 0.0 else lo
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        if abs(nxt - eta) <= 4e-16 * max(1.0, abs(eta)):
            return nxt
        eta = nxt
    return eta


def s_value(a, b, u):
    """
    Maximal admissible perturbation ``S(a, b, u)``.

    Equals ``a`` when ``a <= 1`` or ``u = 0``, ``a - b(a-1)/(b+1)`` when
    ``u = 1``, and otherwise the unique positive root of
    :func:`perturbation_residual`. The root is seeded from the Lambert W
    expression and refined by Newton steps on ``log(1 + R)``; bisection takes
    over if the seed is not finite.
    """
    a, b, u = _check(a, b, u)
    if a <= 1.0 or u == 0.0:
        return a
    if u == 1.0:
        return a - b * (a - 1.0) / (b + 1.0)
    try:
        seed = s_value_lambert(a, b, u)
    except (OverflowError, ValueError, ZeroDivisionError):
        seed = math.nan
    if not math.isfinite(seed):
        return s_value_bisect(a, b, u)
    return min(_polish(a, b, u, seed), a)


def s_lower_bounds(a, b, u):
    """
    Explicit lower bounds ``(lb1, lb2, lb3)`` on ``S(a, b, u)``.

    They satisfy ``S >= lb1 >= lb2 >= lb3 = 1 + (a-1)/(b+1)``; ``lb1`` is the
    square-root bound, written here without the ``(1/u - 1)^2`` division that
    loses all precision near ``u = 1``.
    """
    a, b, u = _check(a, b, u)
    if a <= 1.0:
        raise DomainError(f"lower bounds need a > 1, got a={a}")
    if not 0.0 < u < 1.0:
        raise DomainError(f"lower bounds need u in (0, 1), got u={u}")
    c = (1.0 - u) / u
    log_inv_u = -math.log(u)
    k = b * log_inv_u + c
    z = 2.0 * c * c * log_inv_u * (a - 1.0) / (k * k)
    lb1 = a - 2.0 * b * log_inv_u * (a - 1.0) / (k * (math.sqrt(1.0 + z) + 1.0))
    lb2 = a - b * (a - 1.0) * log_inv_u / k
    lb3 = 1.0 + (a - 1.0) / (b + 1.0)
    return lb1, lb2, lb3


def classic_eta(a, b):
    """Fixed perturbation ``min(a, 1 + (a-1)/(b+1))``."""
    return min(a, 1.0 + (a - 1.0) / (b + 1.0))


def perturbed_kl_bound(a, b, u, eta, tight=False, strict=True):
    """
    Perturbed KL bound ``-(a+b-eta) kl((a-eta)/(a+b-eta), u)``.

    Valid for ``0 <= eta <= S(a, b, u)``. With ``tight=True`` the additive
    term ``log P(X >= (a-eta)/(a+b-eta))`` is included. When ``u`` does not
    exceed the perturbed mean the bound is the vacuous ``0``.
    """
    a, b, u = _check(a, b, u)
    eta = float(eta)
    if eta < 0.0:
        raise DomainError(f"eta must be non-negative, got {eta}")
    if eta >= a + b:
        raise DomainError(f"eta={eta} must stay below a+b={a + b}")
    if strict:
        s = s_value(a, b, u)
        if eta > s * (1.0 + _REL_TOL) + _REL_TOL:
            raise PerturbationTooLargeError(f"eta={eta} exceeds S(a, b, u)={s}")
    t = a + b - eta
    x = max(a - eta, 0.0) / t
    if u <= x:
        return 0.0
    value = -t * _binary_kl(x, u)
    if tight:
        value += log_beta_tail_exact(a, b, x)
    return value


@dataclass
class BoundReport:
    """Bound values on the log scale with validity flags and the exact reference."""

    a: float
    b: float
    u: float
    eta_policy: str
    bounds: dict = field(default_factory=dict)
    valid: dict = field(default_factory=dict)
    vacuous: dict = field(default_factory=dict)
    eta: float | None = None
    s: float | None = None
    exact_log_tail: float | None = None

    def violations(self, slack=1e-9):
        if self.exact_log_tail is None:
            return []
        return [name for name, ok in self.valid.items()
                if ok and self.exact_log_tail > self.bounds[name] + slack]

    def to_dict(self):
        return {
            "a": self.a, "b": self.b, "u": self.u, "eta_policy": self.eta_policy,
            "eta": self.eta, "s_value": self.s, "bounds": dict(self.bounds),
            "valid": dict(self.valid), "vacuous": dict(self.vacuous),
            "exact_log_tail": self.exact_log_tail,
        }


def _parse_policy(eta_policy):
    if isinstance(eta_policy, (int, float)):
        return "fixed", float(eta_policy)
    name = str(eta_policy)
    if name.startswith("fixed"):
        inner = name[len("fixed"):].strip("():= ")
        return "fixed", float(inner)
    if name not in ("none", "classic", "maximal"):
        raise DomainError(f"unknown eta policy {eta_policy!r}")
    return name, None


def bound_report(a, b, u, eta_policy="maximal", tight=False):
    """
    Evaluate every bound at ``(a, b, u)``.

    ``eta_policy`` selects the perturbed row: ``"none"`` omits it,
    ``"classic"`` uses :func:`classic_eta`, ``"maximal"`` uses
    :func:`s_value`, and a number or ``"fixed(<eta>)"`` uses that value.
    Bounds outside their validity range are still reported with
    ``valid[name] = False``.
    """
    a, b, u = _check(a, b, u)
    policy, fixed = _parse_policy(eta_policy)
    mean = a / (a + b)
    above = u >= mean - _REL_TOL
    rep = BoundReport(a=a, b=b, u=u, eta_policy=policy if fixed is None else f"fixed({fixed!r})")
    rep.s = s_value(a, b, u)
    for name, fn in (("hoeffding", hoeffding_bound), ("bernstein", bernstein_bound),
                     ("kl", kl_bound)):
        rep.bounds[name] = fn(a, b, u, strict=False)
        rep.valid[name] = above
        rep.vacuous[name] = rep.bounds[name] == 0.0
    if policy != "none":
        eta = {"classic": classic_eta(a, b), "maximal": rep.s, "fixed": fixed}[policy]
        rep.eta = eta
        admissible = 0.0 <= eta <= rep.s * (1.0 + _REL_TOL) + _REL_TOL and eta < a + b
        if eta < a + b and eta >= 0.0:
            value = perturbed_kl_bound(a, b, u, eta, tight=tight, strict=False)
        else:
            value = math.nan
        rep.bounds["perturbed"] = value
        rep.valid["perturbed"] = admissible
        rep.vacuous["perturbed"] = value == 0.0
    rep.exact_log_tail = log_beta_tail_exact(a, b, u)
    return rep
