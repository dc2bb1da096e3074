"""The elementary inequality ``(1+b)^p <= 1 + eps + C eps^-q b^p`` and its constant.

``F(b) = eps^q ((1+b)^p - 1 - eps) / b^p`` is negative near 0, has a single
interior critical point ``b~ = (1+eps)^(1/(p-1)) - 1`` and tends to
``eps^q`` at infinity, so its supremum is attained at ``b~``.
All powers go through exp/log so relative error stays flat over 16 decades of b.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import PreconditionError

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Lemma31Params:
    p: float
    q: float
    eps: float

    def __post_init__(self):
        for name in ("p", "q", "eps"):
            if not math.isfinite(getattr(self, name)):
                raise PreconditionError(f"{name} must be finite")
        if not self.p > 1:
            raise PreconditionError("p must exceed 1")
        if not self.q > self.p - 1:
            raise PreconditionError("q must exceed p - 1")
        if not self.eps > 0:
            raise PreconditionError("eps must be positive")


def critical_point(params):
    """``(1+eps)^(1/(p-1)) - 1``."""
    return math.expm1(math.log1p(params.eps) / (params.p - 1))


def F(params, b):
    """``eps^q ((1+b)^p - 1 - eps) / b^p`` for b > 0 (scalar or array)."""
    b = np.asarray(b, dtype=float)
    p, q, eps = params.p, params.q, params.eps
    numer = np.expm1(p * np.log1p(b)) - eps
    out = numer * np.exp(q * math.log(eps) - p * np.log(b))
    return float(out) if out.ndim == 0 else out


def constant_C(params):
    """``sup_{b>0} F(b) = max(F(b~), eps^q)``.

    ``F(b~) = eps^q (1 + 1/b~)^(p-1)`` is the critical-value formula with
    ``eps^(q/(p-1))`` factored out; it is formed in logs since both factors
    can leave double range while their product does not.
    """
    log_crit = params.q * math.log(params.eps) + (params.p - 1) * math.log1p(1.0 / critical_point(params))
    return max(math.exp(log_crit), params.eps ** params.q)


def golden_section_max(func, lo, hi, tol=1e-12, max_iter=500):
    """Maximise a unimodal ``func`` on ``[lo, hi]``; returns ``(x, func(x))``."""
    a, b = float(lo), float(hi)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = func(c), func(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol * max(1.0, abs(a), abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = func(d)
    return (c, fc) if fc >= fd else (d, fd)


def numerical_sup(params):
    """Supremum of F by golden-section search in ``log b`` over ``(0, 10 b~ + 10]``.

    The value at the right end of the bracket and the limit ``eps^q`` are
    included, since F may still be creeping towards its limit there.  The
    left end ``b~ e^-30`` lies below the root of F, where F < 0, and keeps
    F finite so the search never compares two infinities.
    """
    b_crit = critical_point(params)
    hi = 10.0 * b_crit + 10.0
    _, best = golden_section_max(lambda s: F(params, math.exp(s)), math.log(b_crit) - 30.0, math.log(hi))
    return max(best, F(params, hi), params.eps ** params.q)


class PointwiseMargin(NamedTuple):
    margin: float
    relative: float
    worst_b: float


def verify_pointwise(params, b_grid):
    """Slack of ``(1+b)^p <= 1 + eps + C eps^-q b^p`` over a grid of b >= 0.

    ``relative`` is the smallest ``slack / max(1, rhs)``; a pass needs it
    to be >= -1e-9.
    """
    b = np.asarray(b_grid, dtype=float)
    if b.size == 0 or np.any(b < 0) or not np.all(np.isfinite(b)):
        raise ValueError("b_grid must be a non-empty set of finite b >= 0")
    p, q, eps = params.p, params.q, params.eps
    log_coef = math.log(constant_C(params)) - q * math.log(eps)
    with np.errstate(divide="ignore"):
        scaled = np.exp(log_coef + p * np.log(b))
    slack = eps + scaled - np.expm1(p * np.log1p(b))
    rel = slack / np.maximum(1.0, 1.0 + eps + scaled)
    i = int(np.argmin(rel))
    return PointwiseMargin(float(np.min(slack)), float(rel[i]), float(b[i]))


def vanishing_limit(p, q, eps_grid):
    """``C(p, q, eps)`` along a strictly decreasing eps grid."""
    eps = np.asarray(eps_grid, dtype=float)
    if eps.size == 0:
        raise PreconditionError("eps grid is empty")
    if np.any(np.diff(eps) >= 0):
        raise PreconditionError("eps grid must be strictly decreasing")
    return np.array([constant_C(Lemma31Params(p, q, float(e))) for e in eps])


def critical_slope(params, h=1e-3):
    """Relative log-slope ``b F'(b) / F(b)`` at the critical point.

    Fourth-order central difference in ``log b``.
    """
    s = math.log(critical_point(params))
    g = [F(params, math.exp(s + k * h)) for k in (-2, -1, 1, 2)]
    return (8.0 * (g[2] - g[1]) - (g[3] - g[0])) / (12.0 * h * F(params, math.exp(s)))
