"""Mean curvature and Jacobian of the parallel hypersurfaces of a geodesic ball.

On a rotationally symmetric model the level sets of ``r`` are umbilic, so
the matrix Jacobi system along an outward normal geodesic collapses to
scalars: ``m(t) = n f'/f (r0 + t)`` and ``log J(t) = n log(f(r0+t)/f(r0))``.
Everything here works with those scalars and with the hyperbolic
comparators of matching initial mean curvature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, PreconditionError, RangeError
from .manifold import log_simpson, simpson_grid
from .ode import DEFAULT_STEP, sample

BLOW_UP_LEVEL = -1e6
PHI_ROUNDOFF = 64 * np.finfo(float).eps


def _log_cosh(t):
    t = np.abs(np.asarray(t, dtype=float))
    return t + np.log1p(np.exp(-2.0 * t)) - math.log(2.0)


def _comparators(H0, n, t):
    # NaN wherever cosh t + (H0/n) sinh t <= 0
    t = np.asarray(t, dtype=float)
    k = H0 / n
    th = np.tanh(t)
    den = 1.0 + k * th
    with np.errstate(divide="ignore", invalid="ignore"):
        m_hat = np.where(den > 0, n * (th + k) / den, np.nan)
        log_j = np.where(den > 0, n * (_log_cosh(t) + np.log(den)), np.nan)
    return m_hat, log_j


def hyperbolic_comparators(H0, n, t):
    """Mean curvature and log-Jacobian of hyperbolic parallel spheres.

    ``m_hat = n (sinh t + k cosh t)/(cosh t + k sinh t)`` and
    ``log J_hat = n log(cosh t + k sinh t)`` with ``k = H0/n``.
    """
    m_hat, log_j = _comparators(H0, n, t)
    if np.any(np.isnan(m_hat)):
        raise DomainError("cosh t + (H0/n) sinh t must stay positive")
    if np.ndim(m_hat) == 0:
        return float(m_hat), float(log_j)
    return m_hat, log_j


def det_upper_bound(b, H0, n, t):
    """``n log(cosh t + (2b + H0/n) sinh t) + 2 n b``.

    Returns NaN where the bracket is not positive: the estimate says nothing
    there (the normal geodesic has already focused).
    """
    t = np.asarray(t, dtype=float)
    den = 1.0 + (2.0 * b + H0 / n) * np.tanh(t)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(den > 0, n * (_log_cosh(t) + np.log(den)) + 2.0 * n * b, np.nan)
    return float(out) if out.ndim == 0 else out


def _fd4(y, h):
    c = np.arange(2, len(y) - 2)
    return c, (8.0 * (y[c + 1] - y[c - 1]) - (y[c + 2] - y[c - 2])) / (12.0 * h)


@dataclass(frozen=True)
class TubeEvolution:
    """Scalar tube data along one outward normal geodesic.

    ``phi = max(m - m_hat, 0)``; it is NaN only where the comparator is
    undefined.  ``blow_up`` is the time at which ``m`` dropped below -1e6,
    if it did.
    """

    n: int
    grid: np.ndarray
    m: np.ndarray
    logJ: np.ndarray
    m_hat: np.ndarray
    logJ_hat: np.ndarray
    phi: np.ndarray
    blow_up: Optional[float] = None
    rho: Optional[np.ndarray] = None

    def consistency(self):
        """Max FD residuals of ``(log J)' = m`` and the comparator identities."""
        t = self.grid
        if len(t) < 5:
            raise ValueError("consistency check needs at least 5 grid points")
        h = t[1] - t[0]
        if not np.allclose(np.diff(t), h, rtol=1e-9, atol=0.0):
            raise ValueError("consistency check needs a uniform grid")
        c, dlog = _fd4(self.logJ, h)
        _, dlog_hat = _fd4(self.logJ_hat, h)
        _, dm_hat = _fd4(self.m_hat, h)
        n = self.n
        return {
            "logJ_rate": float(np.nanmax(np.abs(dlog - self.m[c]))),
            "logJ_hat_rate": float(np.nanmax(np.abs(dlog_hat - self.m_hat[c]))),
            "m_hat_riccati": float(np.nanmax(np.abs(dm_hat + self.m_hat[c] ** 2 / n - n))),
        }


def _make(grid, m, logj, H0, n, blow_up=None, rho=None):
    m_hat, logj_hat = _comparators(H0, n, grid)
    # differences within a few ulps of the operands are roundoff, not excess curvature
    floor = PHI_ROUNDOFF * np.maximum(np.abs(m), float(n))
    with np.errstate(invalid="ignore"):
        excess = m - m_hat
        phi = np.where(np.isnan(m_hat), np.nan, np.where(excess > floor, excess, 0.0))
    for a in (grid, m, logj, m_hat, logj_hat, phi):
        a.flags.writeable = False
    return TubeEvolution(n, grid, m, logj, m_hat, logj_hat, phi, blow_up, rho)


def evolve_tube(domain, t_max, step=DEFAULT_STEP):
    """Exact tube data of a geodesic ball on a uniform grid over [0, t_max].

    The grid has an even number of intervals so the result can be fed to
    Simpson quadrature directly.
    """
    man = domain.manifold
    if domain.r0 + t_max > man.r_max * (1 + 1e-12):
        raise RangeError("tube evolution exceeds the model's radial range")
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    t = simpson_grid(0.0, t_max, step)
    r = domain.r0 + t
    n = man.n
    m = n * man.dlog_f(r)
    logj = n * (man.log_f(r) - float(man.log_f(domain.r0)))
    logj[0] = 0.0
    if m[0] <= 0:
        raise PreconditionError("boundary is not mean-convex (f' must be positive)")
    return _make(t, m, logj, float(m[0]), n, rho=man.rho(r))


def evolve_riccati_free(Lambda, H0, n, t_max, step=DEFAULT_STEP):
    """Integrate ``m' = n (1 + Lambda(t)) - m^2/n`` from ``m(0) = H0``.

    Classical RK4 on ``(m, log J)``.  The step is cut to keep
    ``|m| h / n <= 0.05`` so the solver follows ``m`` down a blow-up
    ``m ~ -n/(t1 - t)`` geometrically; once ``m < -1e6`` the crossing time is
    interpolated linearly in ``1/m`` and integration stops.
    """
    if not step > 0 or not t_max > 0:
        raise ValueError("step and t_max must be positive")
    n = int(n)
    t, m, L = 0.0, float(H0), 0.0
    ts, ms, Ls = [t], [m], [L]
    blow_up = None

    def rhs(g, m):
        return n * g - m * m / n

    while t < t_max:
        h = min(step, t_max - t, 0.05 * n / max(abs(m), 1e-300))
        g = 1.0 + sample(Lambda, np.array([t, t + 0.5 * h, t + h]))
        k1 = rhs(g[0], m)
        k2 = rhs(g[1], m + 0.5 * h * k1)
        k3 = rhs(g[1], m + 0.5 * h * k2)
        k4 = rhs(g[2], m + h * k3)
        m_new = m + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        L += h / 6.0 * (m + 2 * (m + 0.5 * h * k1) + 2 * (m + 0.5 * h * k2) + m + h * k3)
        if m_new < BLOW_UP_LEVEL:
            frac = (1.0 / m - 1.0 / BLOW_UP_LEVEL) / (1.0 / m - 1.0 / m_new)
            blow_up = t + frac * h
            break
        t += h
        m = m_new
        ts.append(t)
        ms.append(m)
        Ls.append(L)
    return _make(np.array(ts), np.array(ms), np.array(Ls), float(H0), n, blow_up)


def lp_comparison_constant(n, p):
    """``(n (2p-1) / (2p-1-n))^p``."""
    if not p > 0.5 * (n + 1):
        raise PreconditionError("p must exceed (n+1)/2")
    return (n * (2 * p - 1) / (2 * p - 1 - n)) ** p


def sech_power_integral(alpha):
    """``int_0^inf cosh(t)^(-alpha) dt = sqrt(pi) Gamma(alpha/2) / (2 Gamma((alpha+1)/2))``."""
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    return 0.5 * math.exp(0.5 * math.log(math.pi) + gammaln(0.5 * alpha) - gammaln(0.5 * (alpha + 1)))


def cnp_constant(n, p):
    """Jacobian-comparison constant for mean-convex boundaries.

    ``(1/2p) (int_0^inf cosh^(-n/(2p-1)))^(1 - 1/2p)``, using the uniform
    lower bound ``J_hat >= cosh^n`` valid whenever ``H >= 0``.
    """
    if not p > 0.5 * (n + 1):
        raise PreconditionError("p must exceed (n+1)/2")
    integral = sech_power_integral(n / (2 * p - 1))
    return integral ** (1.0 - 1.0 / (2 * p)) / (2 * p)


class ComparisonMargin(NamedTuple):
    lhs: float
    rhs: float
    margin: float


def _log_integral(log_vals, x):
    if not np.any(np.isfinite(log_vals)):
        return -math.inf
    return log_simpson(log_vals, x)


def _mean_convex_tube(domain, p, t_max, step):
    n = domain.n
    if not p > 0.5 * (n + 1):
        raise PreconditionError("p must exceed (n+1)/2")
    if domain.mean_curvature < 0:
        raise PreconditionError("boundary must be mean-convex")
    return evolve_tube(domain, t_max, step)


def _log_phi_moment(evo, p):
    with np.errstate(divide="ignore"):
        return _log_integral(2 * p * np.log(evo.phi) + evo.logJ, evo.grid)


def verify_lp_mean_comparison(domain, p, t_max, step=DEFAULT_STEP):
    """Compare ``int phi^2p J`` with ``K int rho^p J`` along the normal geodesic.

    ``K = (n(2p-1)/(2p-1-n))^p``.  Returns lhs, rhs and ``rhs - lhs``.
    """
    evo = _mean_convex_tube(domain, p, t_max, step)
    lhs = math.exp(_log_phi_moment(evo, p))
    with np.errstate(divide="ignore"):
        log_rho = _log_integral(p * np.log(evo.rho) + evo.logJ, evo.grid)
    rhs = lp_comparison_constant(domain.n, p) * math.exp(log_rho)
    return ComparisonMargin(lhs, rhs, rhs - lhs)


def verify_jacobian_comparison(domain, p, r, step=DEFAULT_STEP):
    """Check ``J(r) <= J_hat(r) (1 + C(n,p) (int_0^r phi^2p J)^(1/2p))^(2p)``."""
    evo = _mean_convex_tube(domain, p, r, step)
    x = math.exp(_log_phi_moment(evo, p) / (2 * p))
    log_rhs = float(evo.logJ_hat[-1]) + 2 * p * math.log1p(cnp_constant(domain.n, p) * x)
    log_lhs = float(evo.logJ[-1])
    rhs = math.exp(log_rhs)
    return ComparisonMargin(math.exp(log_lhs), rhs, -rhs * math.expm1(log_lhs - log_rhs))
