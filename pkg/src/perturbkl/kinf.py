"""
K_inf for finite discrete measures.

``K_inf(nu, u, f) = inf { KL(nu || mu) : sum(mu * f) >= u }`` is evaluated
through its one-dimensional concave dual

    max_{0 <= lam <= 1/(f_max - u)}  sum_i nu_i log(1 - lam (f_i - u))

by bisection on the (decreasing) dual derivative. ``f_max`` is taken over the
whole support, zero-weight points included.
"""
import math
from dataclasses import dataclass

import numpy as np

from ._accel import NUMBA_ENABLED, jit
from .errors import DomainError

MAX_ITER = 200
DERIV_TOL = 1e-12
PROB_TOL = 1e-12

# status codes shared by the kernels
OK = 0
BOUNDARY = 1      # u == f_max: limit convention
INFEASIBLE = 2    # u > f_max, or u == f_max with mass off argmax f


@jit
def _dual(nu, f, u, lam):
    s = 0.0
    for i in range(nu.shape[0]):
        if nu[i] > 0.0:
            arg = 1.0 - lam * (f[i] - u)
            if arg <= 0.0:
                return -np.inf
            s += nu[i] * math.log(arg)
    return s


@jit
def _dual_deriv(nu, f, u, lam):
    s = 0.0
    for i in range(nu.shape[0]):
        if nu[i] > 0.0:
            s += nu[i] * (u - f[i]) / (1.0 - lam * (f[i] - u))
    return s


@jit
def _kinf_scalar(nu, f, u):
    """Return ``(value, lam, derivative, status)``."""
    fmax = f[0]
    for i in range(1, f.shape[0]):
        if f[i] > fmax:
            fmax = f[i]
    if u > fmax:
        return np.inf, np.nan, np.nan, INFEASIBLE
    if u == fmax:
        for i in range(f.shape[0]):
            if nu[i] > 0.0 and f[i] < fmax:
                return np.inf, np.nan, np.nan, INFEASIBLE
        return 0.0, 0.0, 0.0, BOUNDARY
    d0 = _dual_deriv(nu, f, u, 0.0)
    if d0 <= 0.0:
        return 0.0, 0.0, d0, OK
    lam_max = 1.0 / (fmax - u)
    top = 0.0
    for i in range(f.shape[0]):
        if f[i] == fmax:
            top += nu[i]
    if top == 0.0:
        dmax = _dual_deriv(nu, f, u, lam_max)
        if dmax >= 0.0:
            return max(_dual(nu, f, u, lam_max), 0.0), lam_max, dmax, OK
    lo = 0.0
    hi = lam_max
    dlo = d0
    for _ in range(MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        dm = _dual_deriv(nu, f, u, mid)
        if dm > 0.0:
            lo = mid
            dlo = dm
            if dm <= DERIV_TOL:
                break
        elif dm < 0.0:
            hi = mid
            if dm >= -DERIV_TOL:
                lo = mid
                dlo = dm
                break
        else:
            lo = mid
            dlo = 0.0
            break
    return max(_dual(nu, f, u, lo), 0.0), lo, dlo, OK


@jit
def _kinf_batch_loop(nu, values, u):
    n = values.shape[0]
    out = np.empty(n)
    for r in range(n):
        out[r] = _kinf_scalar(nu, values[r], u)[0]
    return out


def kinf_batch_numpy(nu, values, u, iters=80):
    """
    Row-wise K_inf for a shared ``nu`` and a matrix of value vectors.

    Pure numpy bisection; every row runs the same fixed number of halvings,
    which is enough to reach the float resolution of ``lam``.
    """
    nu = np.asarray(nu, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    fmax = values.max(axis=1)
    out = np.zeros(values.shape[0])
    pos = nu > 0.0
    w = nu[pos]
    F = values[:, pos] - u
    off_top = (values[:, pos] < fmax[:, None]).any(axis=1)
    out[u > fmax] = np.inf
    out[(u == fmax) & off_top] = np.inf

    active = (u < fmax) & (F @ w < 0.0)
    if not active.any():
        return out
    F = F[active]
    lam_max = 1.0 / (fmax[active] - u)
    top_empty = ~((values[active][:, pos] == fmax[active, None]).any(axis=1))

    def deriv(lam):
        with np.errstate(divide="ignore", invalid="ignore"):
            return (w * (-F) / (1.0 - lam[:, None] * F)).sum(axis=1)

    lo = np.zeros_like(lam_max)
    hi = lam_max.copy()
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        up = deriv(mid) > 0.0
        lo = np.where(up, mid, lo)
        hi = np.where(up, hi, mid)
    lam = lo
    if top_empty.any():
        at_edge = top_empty & (deriv(lam_max) >= 0.0)
        lam = np.where(at_edge, lam_max, lam)
    with np.errstate(divide="ignore"):
        val = (w * np.log1p(-lam[:, None] * F)).sum(axis=1)
    out[active] = np.maximum(val, 0.0)
    return out


def kinf_batch(nu, values, u):
    """Row-wise K_inf; numba loop when enabled, numpy bisection otherwise."""
    nu = np.ascontiguousarray(nu, dtype=np.float64)
    values = np.ascontiguousarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[1] != nu.shape[0]:
        raise DomainError("values must be an (n, len(nu)) matrix")
    if NUMBA_ENABLED:
        return _kinf_batch_loop(nu, values, float(u))
    return kinf_batch_numpy(nu, values, float(u))


@dataclass(frozen=True)
class KinfSolution:
    value: float
    lam: float
    derivative: float
    status: int

    @property
    def convention(self):
        return self.status == BOUNDARY


def _as_problem(nu, f):
    nu = np.ascontiguousarray(nu, dtype=np.float64)
    f = np.ascontiguousarray(f, dtype=np.float64)
    if nu.ndim != 1 or f.ndim != 1 or nu.shape != f.shape:
        raise DomainError("nu and f must be 1-d arrays of equal length")
    if nu.size == 0:
        raise DomainError("empty support")
    if (nu < 0).any() or not np.isfinite(nu).all():
        raise DomainError("nu must have finite non-negative weights")
    if not np.isfinite(f).all():
        raise DomainError("f must be finite")
    if abs(nu.sum() - 1.0) > PROB_TOL * max(1, nu.size):
        raise DomainError(f"nu must be a probability vector, total is {nu.sum()!r}")
    return nu, f


def kinf_solve(nu, u, f):
    """Solve the dual problem and return the value with its maximiser ``lam``."""
    nu, f = _as_problem(nu, f)
    value, lam, deriv, status = _kinf_scalar(nu, f, float(u))
    return KinfSolution(float(value), float(lam), float(deriv), int(status))


def kinf(nu, u, f):
    """
    ``K_inf(nu, u, f)``.

    Returns 0 when ``sum(nu * f) >= u`` (this includes ``u < min f``) and
    ``inf`` when ``u > max f``. At ``u == max f`` the value is 0 if ``nu``
    lives on the maximisers of ``f`` and ``inf`` otherwise.
    """
    return kinf_solve(nu, u, f).value


def kinf_dual_objective(nu, u, f, lam):
    """``sum_i nu_i log(1 - lam (f_i - u))`` for ``lam`` in ``[0, 1/(max f - u)]``."""
    nu, f = _as_problem(nu, f)
    u, lam = float(u), float(lam)
    fmax = f.max()
    if not u < fmax:
        raise DomainError("the dual objective needs u < max f")
    lam_max = 1.0 / (fmax - u)
    if not -1e-15 <= lam <= lam_max * (1 + 1e-15):
        raise DomainError(f"lam={lam} outside [0, {lam_max}]")
    return float(_dual(nu, f, u, min(max(lam, 0.0), lam_max)))


def kinf_dual_derivative(nu, u, f, lam):
    nu, f = _as_problem(nu, f)
    return float(_dual_deriv(nu, f, float(u), float(lam)))


def binary_kinf_threshold(u, v, w, v_floor=None, w_floor=None):
    """
    Threshold ``(u-w)^+ / (v-u+(u-w)^+)`` at which the event
    ``B v + (1-B) w >= u`` becomes ``B >= threshold``.

    When floors ``v' <= v`` and ``w' <= w`` are supplied the threshold is
    computed from them, which can only increase it.
    """
    u, v, w = float(u), float(v), float(w)
    vv = v if v_floor is None else float(v_floor)
    ww = w if w_floor is None else float(w_floor)
    if not v > u:
        raise DomainError(f"need v > u, got v={v}, u={u}")
    if not (v >= vv > u):
        raise DomainError(f"need v >= v_floor > u, got v={v}, v_floor={vv}, u={u}")
    if not (w >= ww):
        raise DomainError(f"need w >= w_floor, got w={w}, w_floor={ww}")
    gap = max(u - ww, 0.0)
    return gap / (vv - u + gap)


def kinf_brute_force(nu, u, f, grid_resolution=400):
    """
    Primal K_inf by exhaustive grid search, for supports of size <= 4.

    When ``nu`` itself is infeasible the minimiser lies on the face
    ``sum(mu * f) = u``; the grid runs over all but two coordinates of ``mu``
    (step ``1/grid_resolution``) and the remaining two, at the largest and
    smallest ``f``, are solved from the two linear constraints. Every grid
    point is feasible, so the result never undershoots the true value.
    """
    nu = np.asarray(nu, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    d = nu.size
    if d == 0 or f.shape != nu.shape:
        raise DomainError("nu and f must be non-empty and of equal length")
    if d > 4:
        raise DomainError("brute force is limited to supports of size <= 4")
    u = float(u)
    fmax = f.max()
    if u > fmax:
        return math.inf
    if u == fmax:
        return 0.0 if nu[f < fmax].sum() == 0.0 else math.inf
    if nu @ f >= u:
        return 0.0
    hi, lo = int(np.argmax(f)), int(np.argmin(f))
    rest = [i for i in range(d) if i not in (hi, lo)]
    steps = np.arange(grid_resolution + 1) / grid_resolution
    if rest:
        axes = np.meshgrid(*([steps] * len(rest)), indexing="ij")
        pts = np.stack([ax.ravel() for ax in axes], axis=1)
        pts = pts[pts.sum(axis=1) <= 1.0]
    else:
        pts = np.zeros((1, 0))
    mass = pts.sum(axis=1)
    moment = pts @ f[rest] if rest else np.zeros(1)
    mu_hi = (u - moment - f[lo] * (1.0 - mass)) / (f[hi] - f[lo])
    mu_lo = 1.0 - mass - mu_hi
    ok = (mu_hi >= 0.0) & (mu_lo >= 0.0)
    if not ok.any():
        return math.inf
    mu = np.empty((int(ok.sum()), d))
    mu[:, rest] = pts[ok]
    mu[:, hi] = mu_hi[ok]
    mu[:, lo] = mu_lo[ok]
    pos = nu > 0.0
    with np.errstate(divide="ignore"):
        kl = (nu[pos] * (np.log(nu[pos]) - np.log(mu[:, pos]))).sum(axis=1)
    return float(kl.min())

