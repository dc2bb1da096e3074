"""Rotationally symmetric models ``dr^2 + f(r)^2 g_{S^n}`` and geodesic balls.

Two warps are supported: ``f = sinh`` (hyperbolic space) and ``f = psi1``
generated by a profile, i.e. ``f'' = (1 + lam(r)) f`` with ``f(0) = 0``,
``f'(0) = 1``.  For the generated warp ``f`` is solved once on a uniform
grid and evaluated elsewhere by quintic Hermite interpolation using the
exact second derivative ``(1 + lam) f``.

The tangential Ricci curvature involves ``1 - f'^2``, which cancels
catastrophically once ``f`` is large.  It is computed instead from
``D = f'^2 - f^2 - 1``, obtained by quadrature of ``D' = 2 lam f f'``;
for the hyperbolic warp ``D`` vanishes identically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.special import gammaln, logsumexp

from .errors import ConfigurationError, DomainError, PreconditionError, RangeError
from .ode import DEFAULT_STEP, solve_psi_pair
from .profiles import DecayProfile

MAX_RADIUS = 600.0  # psi1 stays finite in double precision below ~709


def sphere_volume_constant(n):
    """Area of the unit n-sphere in R^{n+1}: ``2 pi^((n+1)/2) / Gamma((n+1)/2)``."""
    if int(n) != n or n < 1:
        raise DomainError("n must be a positive integer")
    return math.exp(log_sphere_volume_constant(n))


def log_sphere_volume_constant(n):
    return math.log(2.0) + 0.5 * (n + 1) * math.log(math.pi) - gammaln(0.5 * (n + 1))


def _quintic_hermite(x, grid, p, dp, ddp):
    """Evaluate the C2 quintic Hermite interpolant of (p, p', p'') at x."""
    h = grid[1] - grid[0]
    i = np.clip(np.searchsorted(grid, x, side="right") - 1, 0, len(grid) - 2)
    s = (x - grid[i]) / h
    s2 = s * s
    s3 = s2 * s
    s4 = s3 * s
    s5 = s4 * s
    h0 = 1 - 10 * s3 + 15 * s4 - 6 * s5
    h1 = s - 6 * s3 + 8 * s4 - 3 * s5
    h2 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5
    h3 = 0.5 * s3 - s4 + 0.5 * s5
    h4 = -4 * s3 + 7 * s4 - 3 * s5
    h5 = 10 * s3 - 15 * s4 + 6 * s5
    return (h0 * p[i] + h5 * p[i + 1] + h * (h1 * dp[i] + h4 * dp[i + 1])
            + h * h * (h2 * ddp[i] + h3 * ddp[i + 1]))


def simpson_grid(a, b, step):
    """Uniform grid on [a, b] with an even number of intervals, spacing <= step."""
    n = max(2, int(math.ceil((b - a) / step - 1e-9)))
    n += n % 2
    return np.linspace(a, b, n + 1)


def log_simpson(log_values, x):
    """``log int f`` by composite Simpson, given ``log f`` on a simpson_grid."""
    n = len(x) - 1
    if n < 2 or n % 2:
        raise ValueError("Simpson needs an even number of intervals")
    h = (x[-1] - x[0]) / n
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return float(logsumexp(log_values, b=w)) + math.log(h / 3.0)


def _log_sinh(r):
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        return r + np.log(-np.expm1(-2.0 * r)) - math.log(2.0)


def log_sinh_power_integral(n, r, step=DEFAULT_STEP):
    """``log int_0^r sinh(s)^n ds`` by log-stabilised Simpson quadrature."""
    x = simpson_grid(0.0, r, step)
    return log_simpson(n * _log_sinh(x), x)


class RotSymManifold:
    """Warped product ``[0, inf) x S^n`` with metric ``dr^2 + f(r)^2 g``.

    Parameters
    ----------
    n : int
        Dimension of the spheres (manifold dimension ``n + 1``).
    warp : "hyperbolic" or DecayProfile
        ``"hyperbolic"`` for ``f = sinh``; a profile for the psi1 warp.
    r_max : float
        Radial range on which the model is available.
    step : float
        Solver step for generated warps; also the default quadrature spacing.
    """

    def __init__(self, n, warp="hyperbolic", r_max=45.0, step=DEFAULT_STEP):
        if int(n) != n or n < 1:
            raise ConfigurationError("n must be a positive integer")
        if not 0 < r_max <= MAX_RADIUS:
            raise ConfigurationError(f"r_max must lie in (0, {MAX_RADIUS}]")
        self.n = int(n)
        self.r_max = float(r_max)
        self.step = float(step)
        if isinstance(warp, str):
            if warp != "hyperbolic":
                raise ConfigurationError(f"unknown warp {warp!r}")
            self.profile = DecayProfile.zero()
            self.hyperbolic = True
            self.grid = None
        elif isinstance(warp, DecayProfile):
            self.profile = warp
            self.hyperbolic = False
            self._solve()
        else:
            raise ConfigurationError("warp must be 'hyperbolic' or a DecayProfile")

    def _solve(self):
        sol1, _ = solve_psi_pair(self.profile, self.r_max, self.step)
        r = sol1.grid
        f, fp = sol1.psi, sol1.dpsi
        if np.any(f[1:] <= 0) or np.any(fp <= 0):
            raise ConfigurationError("warp is not positive and increasing")
        lam = self.profile(r)
        dlam = self.profile.derivative(r)
        self.grid = r
        self.step = float(r[1] - r[0])
        self._f = f
        self._fp = fp
        self._fpp = (1.0 + lam) * f
        self._fppp = dlam * f + (1.0 + lam) * fp
        d1 = 2.0 * lam * f * fp
        self._D = cumulative_simpson(d1, x=r, initial=0.0)
        self._dD = d1
        self._ddD = 2.0 * dlam * f * fp + 2.0 * lam * (fp * fp + self._fpp * f)
        for a in (self._f, self._fp, self._fpp, self._fppp, self._D):
            a.flags.writeable = False

    @property
    def label(self):
        return "hyperbolic" if self.hyperbolic else f"psi1[{self.profile.label}]"

    @classmethod
    def from_config(cls, cfg):
        warp = cfg.get("warp", "hyperbolic")
        if isinstance(warp, dict):
            if set(warp) != {"psi1"}:
                raise ConfigurationError("warp object must be {\"psi1\": profile}")
            warp = DecayProfile.from_dict(warp["psi1"])
        return cls(cfg["n"], warp, r_max=cfg.get("r_max", 45.0),
                   step=cfg.get("step", DEFAULT_STEP))

    # -- warp evaluation --------------------------------------------------
    def _check(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < 0) or np.any(r > self.r_max * (1 + 1e-12)):
            raise RangeError(f"radius outside [0, {self.r_max}]")
        return r

    def lam(self, r):
        return self.profile(self._check(r))

    def f(self, r):
        r = self._check(r)
        if self.hyperbolic:
            return np.sinh(r)
        return _quintic_hermite(r, self.grid, self._f, self._fp, self._fpp)

    def fp(self, r):
        r = self._check(r)
        if self.hyperbolic:
            return np.cosh(r)
        return _quintic_hermite(r, self.grid, self._fp, self._fpp, self._fppp)

    def log_f(self, r):
        r = self._check(r)
        if self.hyperbolic:
            return _log_sinh(r)
        with np.errstate(divide="ignore"):
            return np.log(self.f(r))

    def dlog_f(self, r):
        """``f'/f``."""
        r = self._check(r)
        with np.errstate(divide="ignore"):
            if self.hyperbolic:
                return 1.0 / np.tanh(r)
            return self.fp(r) / self.f(r)

    def deficit(self, r):
        """``D(r) = f'^2 - f^2 - 1 >= 0``."""
        r = self._check(r)
        if self.hyperbolic or self.profile.family == "zero":
            return np.zeros_like(r)
        return _quintic_hermite(r, self.grid, self._D, self._dD, self._ddD)

    # -- curvature --------------------------------------------------------
    def ricci_extremes(self, r):
        """Ricci curvature in the radial and in tangential unit directions."""
        r = self._check(r)
        if np.any(r <= 0):
            raise RangeError("curvature needs r > 0")
        lam = self.profile(r)
        n = self.n
        radial = -n * (1.0 + lam)
        tangential = -n - lam - (n - 1) * self.deficit(r) / self.f(r) ** 2
        return radial, tangential

    def rho(self, r):
        """``max(-n - Ric_min, 0)`` with Ric_min the smallest Ricci value at r."""
        radial, tangential = self.ricci_extremes(r)
        return np.maximum(0.0, -self.n - np.minimum(radial, tangential))

    def sample_radii(self, r_lo=None, r_hi=None):
        """Grid used for curvature scans (solver grid, or uniform for sinh)."""
        if self.grid is not None:
            r = self.grid[1:]
        else:
            r = np.linspace(self.step, self.r_max, int(round(self.r_max / self.step)))
        if r_lo is not None:
            r = r[r >= r_lo]
        if r_hi is not None:
            r = r[r <= r_hi]
        return r


@dataclass(frozen=True)
class GeodesicBallDomain:
    """Ball of radius r0 about the base point; boundary is a geodesic sphere."""

    manifold: RotSymManifold
    r0: float

    def __post_init__(self):
        if not 0 < self.r0 <= self.manifold.r_max:
            raise ConfigurationError("r0 must lie in (0, r_max]")

    @property
    def n(self):
        return self.manifold.n

    @property
    def mean_curvature(self):
        return boundary_mean_curvature(self)

    @property
    def log_boundary_area(self):
        return log_sphere_volume_constant(self.n) + self.n * float(self.manifold.log_f(self.r0))


def ricci_extremes(manifold, r):
    return manifold.ricci_extremes(r)


def rho_at(manifold, r):
    return manifold.rho(r)


def verify_curvature_bound(manifold, profile, directions="all"):
    """Minimum over the grid of ``Ric + n + n lam(r)``.

    ``directions="all"`` takes the worst of radial and tangential
    directions; ``"radial"`` only checks the radial direction, which is the
    direction of the outward normal geodesics of a centred geodesic ball.
    A margin below -1e-7 marks the model as not satisfying the bound.
    """
    if directions not in ("all", "radial"):
        raise ValueError("directions must be 'all' or 'radial'")
    r = manifold.sample_radii()
    radial, tangential = manifold.ricci_extremes(r)
    ric = radial if directions == "radial" else np.minimum(radial, tangential)
    return float(np.min(ric + manifold.n * (1.0 + profile(r))))


def lp_norm_rho(manifold, p, r_cut, step=None):
    """``(omega_n int_0^r_cut rho^p f^n dr)^(1/p)`` by Simpson quadrature."""
    n = manifold.n
    if not p > 0.5 * (n + 1):
        raise PreconditionError("p must exceed (n+1)/2")
    if not 0 < r_cut <= manifold.r_max:
        raise RangeError("r_cut must lie in (0, r_max]")
    x = simpson_grid(0.0, r_cut, step or manifold.step)
    x[0] = 0.0
    rho = np.zeros_like(x)
    rho[1:] = manifold.rho(x[1:])
    if not np.any(rho > 0):
        return 0.0
    with np.errstate(divide="ignore"):
        log_vals = p * np.log(rho) + n * manifold.log_f(x)
    log_int = log_simpson(log_vals, x) + log_sphere_volume_constant(n)
    return math.exp(log_int / p)


def boundary_mean_curvature(domain):
    """``H = n f'(r0)/f(r0)`` with respect to the outward normal."""
    return domain.n * float(domain.manifold.dlog_f(domain.r0))


def tube_volume_log(domain, r, step=None):
    """``log vol{x : d(x, Omega) <= r} = log(omega_n int_0^{r0+r} f^n)``."""
    if r < 0:
        raise DomainError("tube width must be >= 0")
    m = domain.manifold
    R = domain.r0 + r
    if R > m.r_max * (1 + 1e-12):
        raise RangeError("tube exceeds the model's radial range")
    x = simpson_grid(0.0, R, step or m.step)
    return log_simpson(m.n * m.log_f(x), x) + log_sphere_volume_constant(m.n)
