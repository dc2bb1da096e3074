"""Willmore-type inequalities for geodesic balls in model manifolds.

Both theorems bound ``RV(Omega) * omega_n``, where RV is the limiting ratio
of the volume of the r-tube around the ball to the volume of a hyperbolic
ball of radius r.  On a model manifold the boundary is a geodesic sphere
with constant mean curvature, so each right-hand side is a closed form in
``f(r0)``, ``H`` and the curvature data.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import AdmissibilityError, PreconditionError, RangeError, UnsupportedProfileError
from .lemma31 import Lemma31Params, constant_C
from .manifold import (
    log_sinh_power_integral,
    log_sphere_volume_constant,
    lp_norm_rho,
    tube_volume_log,
    verify_curvature_bound,
    _log_sinh,
)
from .tube import cnp_constant, lp_comparison_constant

DEFAULT_TOL = 1e-6
ADMISSIBILITY_TOL = 1e-7
CONVERGENCE_TOL = 1e-6


@dataclass(frozen=True)
class WillmoreReport:
    """Both sides of one inequality together with the diagnostics behind them."""

    theorem: str
    n: int
    r0: float
    profile: str
    lhs: float
    rhs: float
    rv_estimate: float
    rv_convergence: tuple
    rv_spread: float
    rv_agreement: float
    admissibility: Optional[float] = None
    constants: dict = field(default_factory=dict)
    p: Optional[float] = None
    tol: float = DEFAULT_TOL

    @property
    def margin(self):
        return self.rhs - self.lhs

    @property
    def passed(self):
        return self.margin >= -self.tol * max(1.0, abs(self.rhs))

    @property
    def rv_trusted(self):
        return self.rv_spread <= CONVERGENCE_TOL and self.rv_agreement <= CONVERGENCE_TOL


def _log_raw_ratio(domain, r):
    n = domain.n
    return (tube_volume_log(domain, r) - log_sphere_volume_constant(n)
            - log_sinh_power_integral(n, r, domain.manifold.step))


def estimate_rv(domain, r_eval=40.0):
    """Relative volume ratio of the ball, from the tube volumes at radius r_eval.

    The primary estimate is the derivative ratio ``(f(r0 + r)/sinh r)^n``
    at ``r = r_eval``, which converges much faster than the raw ratio of
    volumes.  Diagnostics hold the raw ratio at ``r_eval/4``, ``r_eval/2``
    and ``r_eval``, the relative spread of the last two, and the relative
    disagreement between the raw ratio at ``r_eval`` and the primary value.
    """
    man = domain.manifold
    if domain.r0 + r_eval > man.r_max * (1 + 1e-12):
        raise RangeError("r0 + r_eval exceeds the model's radial range")
    n = domain.n
    rv = math.exp(n * (float(man.log_f(domain.r0 + r_eval)) - float(_log_sinh(r_eval))))
    radii = (0.25 * r_eval, 0.5 * r_eval, r_eval)
    raw = tuple((r, math.exp(_log_raw_ratio(domain, r))) for r in radii)
    spread = abs(raw[2][1] - raw[1][1]) / abs(raw[2][1])
    agreement = abs(raw[2][1] - rv) / abs(rv)
    return rv, {"ratios": raw, "spread": spread, "agreement": agreement}


def admissibility_margins(domain, profile):
    """Curvature-bound margins along normal geodesics and over all directions."""
    man = domain.manifold
    return {
        "radial": verify_curvature_bound(man, profile, directions="radial"),
        "all": verify_curvature_bound(man, profile, directions="all"),
    }


def thm11_rhs_for_mass(domain, b):
    """``e^{2nb} omega_n f(r0)^n (1 + 2b + H/n)^n``, or 0 when ``H < -n - 2nb``."""
    n = domain.n
    k = 1.0 + 2.0 * b + domain.mean_curvature / n
    if k <= 0:
        return 0.0
    return math.exp(2 * n * b + domain.log_boundary_area + n * math.log(k))


def _check_thm11(domain, profile):
    if not profile.monotone:
        raise UnsupportedProfileError("the asymptotic estimate needs a non-increasing profile")
    margins = admissibility_margins(domain, profile)
    if margins["radial"] < -ADMISSIBILITY_TOL:
        raise AdmissibilityError(
            f"Ric >= -n - n*lam fails along normal geodesics (margin {margins['radial']:.3g})",
            margins["radial"],
        )
    return margins


def thm11_rhs(domain, profile):
    """Right-hand side of the asymptotic-decay inequality for a geodesic ball.

    The profile must be non-increasing and dominate the curvature deficit
    along the outward normal geodesics (radial Ricci margin >= -1e-7).
    """
    _check_thm11(domain, profile)
    return thm11_rhs_for_mass(domain, profile.mass())


def verify_thm11(domain, profile, r_eval=40.0, tol=DEFAULT_TOL):
    margins = _check_thm11(domain, profile)
    b = profile.mass()
    rv, diag = estimate_rv(domain, r_eval)
    return WillmoreReport(
        theorem="thm11",
        n=domain.n,
        r0=domain.r0,
        profile=profile.label,
        lhs=rv * math.exp(log_sphere_volume_constant(domain.n)),
        rhs=thm11_rhs_for_mass(domain, b),
        rv_estimate=rv,
        rv_convergence=diag["ratios"],
        rv_spread=diag["spread"],
        rv_agreement=diag["agreement"],
        admissibility=margins["radial"],
        constants={"b": b, "admissibility_all_directions": margins["all"]},
        tol=tol,
    )


def compose_thm12_constant(n, p, rho_norm):
    """Constant multiplying ``(1 + H_max/n)^n`` in the integral-curvature estimate.

    With ``eps = sqrt(rho_norm)`` and ``q = 2p``:
    ``C_total = C_lemma(2p, 2p, eps) * C(n,p)^(2p) * (n(2p-1)/(2p-1-n))^p``.
    Returns ``(C_total, parts)``; ``C_total = 0`` when ``rho_norm = 0``.
    """
    if not p > 0.5 * (n + 1):
        raise PreconditionError("p must exceed (n+1)/2")
    if not (rho_norm >= 0 and math.isfinite(rho_norm)):
        raise PreconditionError("rho_norm must be finite and >= 0")
    c_np = cnp_constant(n, p)
    k_lp = lp_comparison_constant(n, p)
    parts = {"eps": math.sqrt(rho_norm), "q": 2.0 * p, "C_np": c_np,
             "C_np_pow": c_np ** (2 * p), "K_lp": k_lp}
    if rho_norm == 0:
        parts.update(C_lemma=0.0, C_total=0.0)
        return 0.0, parts
    c_lemma = constant_C(Lemma31Params(2.0 * p, 2.0 * p, parts["eps"]))
    total = c_lemma * parts["C_np_pow"] * k_lp
    parts.update(C_lemma=c_lemma, C_total=total)
    return total, parts


def thm12_rhs(domain, rho_norm, C_total):
    """``(1 + sqrt(rho_norm)) |S| (1 + H/n)^n + C_total (1 + H_max/n)^n``."""
    n = domain.n
    log_h = n * math.log1p(domain.mean_curvature / n)
    return ((1.0 + math.sqrt(rho_norm)) * math.exp(domain.log_boundary_area + log_h)
            + C_total * math.exp(log_h))


def verify_thm12(domain, p, r_eval=40.0, r_cut=30.0, tol=DEFAULT_TOL):
    n = domain.n
    if not p > 0.5 * (n + 1):
        raise PreconditionError("p must exceed (n+1)/2")
    if domain.mean_curvature < 0:
        raise PreconditionError("boundary must be mean-convex")
    rho_norm = lp_norm_rho(domain.manifold, p, r_cut)
    c_total, parts = compose_thm12_constant(n, p, rho_norm)
    rv, diag = estimate_rv(domain, r_eval)
    return WillmoreReport(
        theorem="thm12",
        n=n,
        r0=domain.r0,
        profile=domain.manifold.profile.label,
        lhs=rv * math.exp(log_sphere_volume_constant(n)),
        rhs=thm12_rhs(domain, rho_norm, c_total),
        rv_estimate=rv,
        rv_convergence=diag["ratios"],
        rv_spread=diag["spread"],
        rv_agreement=diag["agreement"],
        constants={"rho_norm": rho_norm, **parts},
        p=float(p),
        tol=tol,
    )
