"""
Scalar special functions: log-gamma, the Beta upper tail, Lambert W0 and the
binary KL divergence.

The kernels (underscore names) carry no argument checking and are compiled
with numba when available; the public wrappers validate and dispatch.
"""
import math

import numpy as np

from ._accel import NUMBA_ENABLED, jit
from .errors import DomainError

CF_MAX_ITER = 500
CF_EPS = 1e-15
_FPMIN = 1e-300


@jit
def _betacf(a, b, x):
    # modified Lentz evaluation of the incomplete beta continued fraction
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, CF_MAX_ITER + 1):
        m2 = 2.0 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < CF_EPS:
            break
    return h


@jit
def _log_beta_upper(a, b, u):
    if u <= 0.0:
        return 0.0
    if u >= 1.0:
        return -np.inf
    lbeta = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    if u < (a + 1.0) / (a + b + 2.0):
        lower = math.exp(a * math.log(u) + b * math.log1p(-u) - lbeta) * _betacf(a, b, u) / a
        return math.log1p(-lower)
    x = 1.0 - u
    return (b * math.log(x) + a * math.log(u) - lbeta
            + math.log(_betacf(b, a, x)) - math.log(b))


@jit
def _log_beta_upper_many(a, b, u):
    out = np.empty(a.shape[0])
    for i in range(a.shape[0]):
        out[i] = _log_beta_upper(a[i], b[i], u[i])
    return out


@jit
def _lambert_w0(x):
    if x == 0.0:
        return 0.0
    if x == np.inf:
        return np.inf
    if x < 1e-3:
        w = x * (1.0 - x)
    elif x < 3.0:
        w = 0.5 * math.log1p(x) + 0.25 * x / (1.0 + x)
    else:
        lx = math.log(x)
        w = lx - math.log(lx)
    for _ in range(50):
        ew = math.exp(w)
        r = w * ew - x
        wp1 = w + 1.0
        dw = r / (ew * wp1 - (w + 2.0) * r / (2.0 * wp1))
        w -= dw
        if abs(dw) <= 1e-15 * (1.0 + abs(w)):
            break
    return w


@jit
def _lambert_w0_exp(logx):
    # W0(exp(logx)) without forming exp(logx) when it would overflow
    if logx < 500.0:
        return _lambert_w0(math.exp(logx))
    w = logx - math.log(logx)
    for _ in range(50):
        dw = (w + math.log(w) - logx) / (1.0 + 1.0 / w)
        w -= dw
        if abs(dw) <= 1e-15 * w:
            break
    return w


@jit
def _kl_term(p, q):
    # p log(p/q) - p + q, written so the linear parts cancel when q is near p
    x = (q - p) / p
    if abs(x) < 0.1:
        s = 0.0
        t = x
        for k in range(2, 80):
            t *= -x
            term = t / k
            s -= term
            if abs(term) <= 1e-17 * abs(s):
                break
        return p * s
    return (q - p) - p * (math.log(q) - math.log(p))


@jit
def _binary_kl(p, q):
    if p == q:
        return 0.0
    if q <= 0.0 or q >= 1.0:
        return np.inf
    if p == 0.0:
        return -math.log1p(-q)
    if p == 1.0:
        return -math.log(q)
    return _kl_term(p, q) + _kl_term(1.0 - p, 1.0 - q)


def log_gamma(x):
    """``log Gamma(x)`` for ``x > 0``."""
    x = float(x)
    if not x > 0.0:
        raise DomainError(f"log_gamma needs x > 0, got {x}")
    return math.lgamma(x)


def _check_beta_args(a, b, u):
    a, b, u = float(a), float(b), float(u)
    if not (a > 0.0 and b > 0.0):
        raise DomainError(f"Beta shapes must be positive, got a={a}, b={b}")
    if not 0.0 <= u <= 1.0:
        raise DomainError(f"threshold must lie in [0, 1], got u={u}")
    return a, b, u


def log_beta_tail_exact(a, b, u):
    """
    Natural log of ``P(X >= u)`` for ``X ~ Beta(a, b)``.

    Deep tails are evaluated directly in log space, so the result stays
    finite long after ``beta_tail_exact`` underflows to zero.
    """
    a, b, u = _check_beta_args(a, b, u)
    return float(_log_beta_upper(a, b, u))


def beta_tail_exact(a, b, u):
    """``P(X >= u)`` for ``X ~ Beta(a, b)``."""
    a, b, u = _check_beta_args(a, b, u)
    if u <= 0.0:
        return 1.0
    if u >= 1.0:
        return 0.0
    if u < (a + 1.0) / (a + b + 2.0):
        lbeta = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
        lower = math.exp(a * math.log(u) + b * math.log1p(-u) - lbeta) * _betacf(a, b, u) / a
        return 1.0 - lower
    return math.exp(_log_beta_upper(a, b, u))


def log_beta_tail_many(a, b, u):
    """Vectorised :func:`log_beta_tail_exact` over broadcast arrays (no checks)."""
    a, b, u = np.broadcast_arrays(*(np.asarray(v, dtype=np.float64) for v in (a, b, u)))
    shape = a.shape
    a, b, u = (np.ascontiguousarray(v).ravel() for v in (a, b, u))
    if NUMBA_ENABLED:
        out = _log_beta_upper_many(a, b, u)
    else:
        out = np.fromiter((_log_beta_upper(*t) for t in zip(a, b, u)), float, a.size)
    return out.reshape(shape)


def lambert_w0(x):
    """Principal branch of Lambert W on ``[0, inf)``."""
    x = float(x)
    if not x >= 0.0:
        raise DomainError(f"lambert_w0 is implemented for x >= 0, got {x}")
    return float(_lambert_w0(x))


def lambert_w0_exp(logx):
    """``W0(exp(logx))``; usable when ``exp(logx)`` overflows."""
    logx = float(logx)
    if math.isnan(logx):
        raise DomainError("logx is NaN")
    if logx == np.inf:
        return np.inf
    return float(_lambert_w0_exp(logx))


def binary_kl(p, q):
    """
    Bernoulli KL divergence ``kl(p || q)``.

    Uses the conventions ``0 log 0 = 0`` and returns ``inf`` whenever ``q`` is
    0 or 1 while ``p`` differs from it. Both log terms are written as
    ``x - log1p(x)`` so their linear parts cancel analytically, which keeps
    full relative precision when ``p`` and ``q`` are close.
    """
    p, q = float(p), float(q)
    if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0):
        raise DomainError(f"binary_kl arguments must lie in [0, 1], got p={p}, q={q}")
    return float(_binary_kl(p, q))
