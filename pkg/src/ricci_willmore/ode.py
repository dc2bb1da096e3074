"""Comparison ODE ``psi'' = (1 + Lambda(t)) psi`` and the two comparison lemmas.

The pair ``psi1`` (data 0, 1) and ``psi2`` (data 1, 0) is integrated with a
fixed-step classical RK4 scheme whose state is held in double-double
arithmetic.  The Wronskian ``psi2 psi1' - psi1 psi2'`` is exactly 1, but both
solutions grow like ``e^t``: in plain doubles the rounding noise injected at
time ``s`` shows up in the Wronskian multiplied by about ``e^(2s)``, which is
already 1e-7 at ``s = 10``.  Compensated arithmetic pushes that floor down
by sixteen decades.  Solutions are also rescaled by exact powers of two so
that nothing overflows for long horizons.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson

from . import _dd
from ._dd import dd_add, dd_mul_d, njit
from .errors import ConfigurationError, PreconditionError

MAX_STEP = 1e-2
DEFAULT_STEP = 1e-3
CROSSING_TOL = 1e-10
_RESCALE_AT = 2.0 ** 600
_RESCALE_EXP = 600


@njit(cache=True, nogil=True)
def _rk4_pair_kernel(g_node, g_mid, h):
    n = g_mid.shape[0]
    state = np.zeros((n + 1, 2, 4))
    expo = np.zeros((n + 1, 2), dtype=np.int64)
    state[0, 0, 2] = 1.0  # psi1' (0) = 1
    state[0, 1, 0] = 1.0  # psi2 (0) = 1
    hh = 0.5 * h
    h6 = h / 6.0
    for j in range(2):
        yh, yl, vh, vl = state[0, j, 0], state[0, j, 1], state[0, j, 2], state[0, j, 3]
        e = 0
        for i in range(n):
            ga = g_node[i]
            gb = g_mid[i]
            gc = g_node[i + 1]
            # stage 1
            k1yh, k1yl = vh, vl
            k1vh, k1vl = dd_mul_d(yh, yl, ga)
            # stage 2
            ah, al = dd_mul_d(k1yh, k1yl, hh)
            th, tl = dd_add(yh, yl, ah, al)
            ah, al = dd_mul_d(k1vh, k1vl, hh)
            k2yh, k2yl = dd_add(vh, vl, ah, al)
            k2vh, k2vl = dd_mul_d(th, tl, gb)
            # stage 3
            ah, al = dd_mul_d(k2yh, k2yl, hh)
            th, tl = dd_add(yh, yl, ah, al)
            ah, al = dd_mul_d(k2vh, k2vl, hh)
            k3yh, k3yl = dd_add(vh, vl, ah, al)
            k3vh, k3vl = dd_mul_d(th, tl, gb)
            # stage 4
            ah, al = dd_mul_d(k3yh, k3yl, h)
            th, tl = dd_add(yh, yl, ah, al)
            ah, al = dd_mul_d(k3vh, k3vl, h)
            k4yh, k4yl = dd_add(vh, vl, ah, al)
            k4vh, k4vl = dd_mul_d(th, tl, gc)
            # combine
            sh, sl = dd_add(k2yh, k2yl, k3yh, k3yl)
            sh, sl = dd_add(2.0 * sh, 2.0 * sl, k1yh, k1yl)
            sh, sl = dd_add(sh, sl, k4yh, k4yl)
            ah, al = dd_mul_d(sh, sl, h6)
            nyh, nyl = dd_add(yh, yl, ah, al)
            sh, sl = dd_add(k2vh, k2vl, k3vh, k3vl)
            sh, sl = dd_add(2.0 * sh, 2.0 * sl, k1vh, k1vl)
            sh, sl = dd_add(sh, sl, k4vh, k4vl)
            ah, al = dd_mul_d(sh, sl, h6)
            vh, vl = dd_add(vh, vl, ah, al)
            yh, yl = nyh, nyl
            if abs(yh) > _RESCALE_AT or abs(vh) > _RESCALE_AT:
                yh = np.ldexp(yh, -_RESCALE_EXP)
                yl = np.ldexp(yl, -_RESCALE_EXP)
                vh = np.ldexp(vh, -_RESCALE_EXP)
                vl = np.ldexp(vl, -_RESCALE_EXP)
                e += _RESCALE_EXP
            state[i + 1, j, 0] = yh
            state[i + 1, j, 1] = yl
            state[i + 1, j, 2] = vh
            state[i + 1, j, 3] = vl
            expo[i + 1, j] = e
    return state, expo


def sample(Lambda, t):
    """Evaluate a user callable on an array, falling back to a scalar loop."""
    t = np.asarray(t, dtype=float)
    try:
        vals = np.asarray(Lambda(t), dtype=float)
        vals = np.broadcast_to(vals, t.shape).copy()
    except (TypeError, ValueError):
        vals = np.array([float(Lambda(float(s))) for s in t.ravel()]).reshape(t.shape)
    return vals


def _readonly(*arrays):
    for a in arrays:
        a.flags.writeable = False


@dataclass(frozen=True)
class OdeSolution:
    """One solution of the comparison ODE on a uniform grid.

    Values are stored as ``(hi + lo) * 2**exponent``; ``psi`` and ``dpsi``
    give the plain double view, ``log_psi`` and ``dlog`` the overflow-free
    log-scaled companions.
    """

    grid: np.ndarray
    psi_hi: np.ndarray
    psi_lo: np.ndarray
    dpsi_hi: np.ndarray
    dpsi_lo: np.ndarray
    exponent: np.ndarray
    lambda_samples: np.ndarray
    lambda_mid: np.ndarray = field(repr=False)

    def __post_init__(self):
        g = self.grid
        if g[0] != 0.0 or np.any(np.diff(g) <= 0):
            raise ValueError("grid must start at 0 and be strictly increasing")
        for name in ("psi_hi", "psi_lo", "dpsi_hi", "dpsi_lo", "exponent", "lambda_samples"):
            if getattr(self, name).shape != g.shape:
                raise ValueError(f"{name} length does not match the grid")

    @property
    def step(self):
        return self.grid[1] - self.grid[0]

    @property
    def psi(self):
        return np.ldexp(self.psi_hi, self.exponent)

    @property
    def dpsi(self):
        return np.ldexp(self.dpsi_hi, self.exponent)

    @property
    def log_psi(self):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.psi_hi)) + self.exponent * math.log(2.0)

    @property
    def dlog(self):
        """``psi'/psi`` (infinite where psi vanishes)."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.dpsi_hi / self.psi_hi


def solve_psi_pair(Lambda, t_max, step=DEFAULT_STEP):
    """Integrate ``psi1`` (0, 1) and ``psi2`` (1, 0) on ``[0, t_max]``.

    The step is shrunk slightly if needed so that ``t_max`` is a grid point.
    """
    if not t_max > 0:
        raise ConfigurationError("t_max must be positive")
    if not 0 < step <= MAX_STEP:
        raise ConfigurationError(f"step must lie in (0, {MAX_STEP}]")
    n = int(math.ceil(t_max / step - 1e-9))
    h = t_max / n
    grid = np.arange(n + 1) * h
    grid[-1] = t_max
    lam_node = sample(Lambda, grid)
    lam_mid = sample(Lambda, grid[:-1] + 0.5 * h)
    if np.any(lam_node < 0) or np.any(lam_mid < 0):
        raise ConfigurationError("Lambda must be nonnegative")
    if not (np.all(np.isfinite(lam_node)) and np.all(np.isfinite(lam_mid))):
        raise ConfigurationError("Lambda must be finite on [0, t_max]")
    state, expo = _rk4_pair_kernel(1.0 + lam_node, 1.0 + lam_mid, h)
    sols = []
    for j in range(2):
        arrays = [state[:, j, k].copy() for k in range(4)] + [expo[:, j].copy()]
        _readonly(grid, lam_node, lam_mid, *arrays)
        sols.append(OdeSolution(grid, *arrays, lam_node, lam_mid))
    return sols[0], sols[1]


def wronskian(sol1, sol2):
    """``psi2 psi1' - psi1 psi2'`` evaluated in double-double arithmetic."""
    ah, al = _dd.mul(sol2.psi_hi, sol2.psi_lo, sol1.dpsi_hi, sol1.dpsi_lo)
    bh, bl = _dd.mul(sol1.psi_hi, sol1.psi_lo, sol2.dpsi_hi, sol2.dpsi_lo)
    wh, wl = _dd.add(ah, al, -bh, -bl)
    return np.ldexp(wh + wl, sol1.exponent + sol2.exponent)


def ratio(num, den):
    """``num.psi / den.psi`` as a double-double pair ``(hi, lo)``."""
    with np.errstate(divide="ignore", invalid="ignore"):
        qh, ql = _dd.div(num.psi_hi, num.psi_lo, den.psi_hi, den.psi_lo)
    shift = num.exponent - den.exponent
    return np.ldexp(qh, shift), np.ldexp(ql, shift)


def _fd6(values_hi, values_lo, h):
    """Sixth-order central difference on interior points (three-point margin).

    Differences of the double-double values are taken before rounding, so
    increments far below one ulp of the value survive.
    """
    def diff(i, j):
        dh, dl = _dd.add(values_hi[i], values_lo[i], -values_hi[j], -values_lo[j])
        return dh + dl

    n = len(values_hi)
    c = np.arange(3, n - 3)
    return (45.0 * diff(c + 1, c - 1) - 9.0 * diff(c + 2, c - 2)
            + diff(c + 3, c - 3)) / (60.0 * h)


@dataclass
class SlackReport:
    """Minimum slack of each checked inequality over the grid.

    A slack is the relative distance to violation (negative means
    violated).  ``residuals`` holds quantities that should be near zero,
    reported as their maximum absolute value.
    """

    slacks: dict
    residuals: dict = field(default_factory=dict)
    worst_t: dict = field(default_factory=dict)

    def ok(self, slack_tol=1e-9, residual_tol=1e-6):
        return (all(v >= -slack_tol for v in self.slacks.values())
                and all(v <= residual_tol for v in self.residuals.values()))


def _min_with_t(values, t, key, report):
    i = int(np.argmin(values))
    report.slacks[key] = float(values[i])
    report.worst_t[key] = float(t[i])


def check_lemma21(sol1, lambda_mass=None, t_min=0.05):
    """Slacks of the two-sided bounds on ``psi1`` and ``psi1'``.

    Checked on grid points with ``t >= t_min``:

    * ``sinh t <= psi1 <= int_0^t exp(I(s)) cosh s ds``
    * ``cosh t <= psi1' <= exp(I(t)) cosh t``
    * ``psi1/sinh`` non-decreasing and ``<= exp(I_inf)``

    where ``I(t) = int_0^t Lambda``.  The right-hand sides are obtained by
    quadrature of the sampled Lambda, not from the solver.  ``I_inf`` is
    ``lambda_mass`` when given (the cap on ``[0, inf)``), otherwise
    ``I(t_max)``, a tighter cap that holds on the grid since
    ``psi1/sinh <= exp(I(t))``.
    """
    t = sol1.grid
    lam = sol1.lambda_samples
    integ = cumulative_simpson(lam, x=t, initial=0.0)
    upper_psi = cumulative_simpson(np.exp(integ) * np.cosh(t), x=t, initial=0.0)
    psi, dpsi = sol1.psi, sol1.dpsi
    sel = t >= t_min
    ts = t[sel]
    rep = SlackReport({})
    sinh, cosh = np.sinh(ts), np.cosh(ts)
    _min_with_t(psi[sel] / sinh - 1.0, ts, "psi1_lower", rep)
    _min_with_t(1.0 - psi[sel] / upper_psi[sel], ts, "psi1_upper", rep)
    _min_with_t(dpsi[sel] / cosh - 1.0, ts, "dpsi1_lower", rep)
    _min_with_t(1.0 - dpsi[sel] / (np.exp(integ[sel]) * cosh), ts, "dpsi1_upper", rep)
    q = psi[sel] / sinh
    if len(q) > 1:
        _min_with_t(np.diff(q) / q[:-1], ts[1:], "ratio_nondecreasing", rep)
    cap_log = integ[-1] if lambda_mass is None else float(lambda_mass)
    _min_with_t(1.0 - q * math.exp(-cap_log), ts, "ratio_cap", rep)
    return rep


def check_lemma22(sol1, sol2, t_min=0.05):
    """Slacks for the ``psi2/psi1`` bound, its monotonicity and its limit.

    The derivative identity ``(psi2/psi1)' = -1/psi1**2`` is checked by a
    sixth-order finite difference of the double-double ratio and reported
    as the relative residual ``max |(psi2/psi1)' psi1**2 + 1|``.  The limit
    bound uses ``psi2/psi1`` at the last grid point, which over-estimates
    the limit because the ratio decreases.
    """
    t = sol1.grid
    lam = sol1.lambda_samples
    w = cumulative_simpson(lam / np.cosh(t) ** 2, x=t, initial=0.0)
    rh, rl = ratio(sol2, sol1)
    sel = t >= t_min
    ts = t[sel]
    r = rh[sel]
    rep = SlackReport({})
    with np.errstate(over="ignore"):
        bound = 1.0 / np.tanh(ts) + w[sel]
    _min_with_t(1.0 - r / bound, ts, "ratio_upper", rep)
    if len(r) > 1:
        _min_with_t(np.diff(r)[::-1] * -1.0 / r[1:][::-1], ts[1:][::-1], "ratio_nonincreasing", rep)
    rep.slacks["limit_bound"] = float(1.0 - rh[-1] / (1.0 + w[-1]))
    rep.worst_t["limit_bound"] = float(t[-1])
    deriv = _fd6(rh, rl, sol1.step)
    tc = t[3:-3]
    psi1 = sol1.psi[3:-3]
    keep = tc >= t_min
    resid = np.abs(deriv[keep] * psi1[keep] ** 2 + 1.0)
    if len(resid):
        i = int(np.argmax(resid))
        rep.residuals["derivative_identity"] = float(resid[i])
        rep.worst_t["derivative_identity"] = float(tc[keep][i])
    return rep


def _single_step(Lambda, t0, y, v, s):
    # one double-precision RK4 step of size s, used for dense output
    ga, gb, gc = 1.0 + sample(Lambda, np.array([t0, t0 + 0.5 * s, t0 + s]))
    k1y, k1v = v, ga * y
    k2y, k2v = v + 0.5 * s * k1v, gb * (y + 0.5 * s * k1y)
    k3y, k3v = v + 0.5 * s * k2v, gb * (y + 0.5 * s * k2y)
    k4y, k4v = v + s * k3v, gc * (y + s * k3y)
    return (y + s / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y),
            v + s / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v))


def psi_zero_crossing(Lambda, H_over_n, t_max, step=DEFAULT_STEP):
    """First zero of ``psi = psi2 + (H/n) psi1`` on ``(0, t_max]``, or None.

    The sign change is located on the solver grid and then refined by
    bisection, with ``psi`` between grid points given by a single RK4 step
    from the left node.
    """
    sol1, sol2 = solve_psi_pair(Lambda, t_max, step)
    k = float(H_over_n)
    psi = sol2.psi + k * sol1.psi
    neg = np.nonzero(psi <= 0.0)[0]
    if len(neg) == 0:
        return None
    i = int(neg[0])
    if psi[i] == 0.0:
        return float(sol1.grid[i])
    t0 = float(sol1.grid[i - 1])
    y = psi[i - 1]
    v = sol2.dpsi[i - 1] + k * sol1.dpsi[i - 1]
    lo, hi = 0.0, float(sol1.grid[i]) - t0
    while hi - lo > CROSSING_TOL:
        mid = 0.5 * (lo + hi)
        val, _ = _single_step(Lambda, t0, y, v, mid)
        if val > 0:
            lo = mid
        else:
            hi = mid
    return t0 + 0.5 * (lo + hi)


def focal_bound_check(two_b, H_over_n, step=DEFAULT_STEP):
    """Smallest grid time ``t0 = k*step`` with ``coth t0 + 2b + H/n < 0``.

    Requires ``H/n < -1 - 2b``; then ``coth t0 < -(2b + H/n)`` has the
    solution set ``t0 > atanh(-1/(2b + H/n))``.
    """
    two_b = float(two_b)
    k = -(two_b + float(H_over_n))
    if not k > 1.0:
        raise PreconditionError("focal bound needs H/n < -1 - 2b")
    if not step > 0:
        raise ConfigurationError("step must be positive")
    i = int(math.floor(math.atanh(1.0 / k) / step))
    while not (1.0 / math.tanh(max(i, 1) * step) - k < 0):
        i += 1
    return max(i, 1) * step
