"""Curvature-excess profiles with closed-form integrals.

A profile is a nonnegative function ``lam(t)`` of the distance to the base
point.  Only a handful of families are supported, each with an exact
antiderivative, so total masses and partial masses never involve truncating
an improper integral.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError, UnsupportedProfileError

FAMILIES = ("zero", "exponential", "power", "smooth_bump")

# fraction of the bump support used by each smoothed edge
BUMP_EDGE_FRACTION = 0.25


def _smootherstep(x):
    # 6x^5 - 15x^4 + 10x^3: C2 ramp from 0 to 1 on [0, 1]
    x = np.clip(x, 0.0, 1.0)
    return x * x * x * (x * (6.0 * x - 15.0) + 10.0)


def _smootherstep_slope(x):
    inside = (x > 0.0) & (x < 1.0)
    x = np.clip(x, 0.0, 1.0)
    return np.where(inside, 30.0 * x * x * (1.0 - x) ** 2, 0.0)


def _smootherstep_integral(x):
    # antiderivative of the ramp, vanishing at 0; equals 1/2 at x = 1
    x = np.clip(x, 0.0, 1.0)
    return x ** 4 * (x * (x - 3.0) + 2.5)


@dataclass(frozen=True)
class DecayProfile:
    """Nonnegative decay profile ``lam(t)``, ``t >= 0``.

    Parameters
    ----------
    family : str
        One of ``zero``, ``exponential`` (``a*exp(-c t)``), ``power``
        (``a/(1+t)**s``) or ``smooth_bump`` (plateau ``a`` inside
        ``[t_lo, t_hi]`` with C2 polynomial edges).
    params : dict
        Family parameters.
    """

    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigurationError(f"unknown profile family {self.family!r}")
        p = dict(self.params)
        required = {
            "zero": (),
            "exponential": ("a", "c"),
            "power": ("a", "s"),
            "smooth_bump": ("a", "t_lo", "t_hi"),
        }[self.family]
        missing = [k for k in required if k not in p]
        if missing:
            raise ConfigurationError(f"{self.family} profile needs {missing}")
        extra = sorted(set(p) - set(required))
        if extra:
            raise ConfigurationError(f"unexpected {self.family} parameters {extra}")
        p = {k: float(v) for k, v in p.items()}
        if any(not math.isfinite(v) for v in p.values()):
            raise ConfigurationError("profile parameters must be finite")
        if p.get("a", 0.0) < 0:
            raise ConfigurationError("amplitude a must be >= 0")
        if self.family == "exponential" and p["c"] <= 0:
            raise ConfigurationError("rate c must be > 0")
        if self.family == "power" and p["s"] <= 1:
            raise ConfigurationError("exponent s must be > 1")
        if self.family == "smooth_bump" and not 0 <= p["t_lo"] < p["t_hi"]:
            raise ConfigurationError("bump support needs 0 <= t_lo < t_hi")
        object.__setattr__(self, "params", p)

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def exponential(cls, a, c):
        return cls("exponential", {"a": a, "c": c})

    @classmethod
    def power(cls, a, s):
        return cls("power", {"a": a, "s": s})

    @classmethod
    def smooth_bump(cls, a, t_lo, t_hi):
        return cls("smooth_bump", {"a": a, "t_lo": t_lo, "t_hi": t_hi})

    @classmethod
    def from_dict(cls, d):
        """Build from a config mapping like ``{"family": "power", "a": 1, "s": 2}``."""
        if not isinstance(d, dict) or "family" not in d:
            raise ConfigurationError("profile must be an object with a 'family' key")
        params = {k: v for k, v in d.items() if k != "family"}
        return cls(d["family"], params)

    def to_dict(self):
        return {"family": self.family, **self.params}

    # -- properties -------------------------------------------------------
    @property
    def monotone(self):
        """True for the non-increasing families (everything but the bump)."""
        return self.family != "smooth_bump"

    @property
    def label(self):
        if self.family == "zero":
            return "zero"
        short = {"exponential": "exp", "power": "power", "smooth_bump": "bump"}[self.family]
        args = ",".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{short}({args})"

    def _bump_edges(self):
        lo, hi = self.params["t_lo"], self.params["t_hi"]
        w = BUMP_EDGE_FRACTION * (hi - lo)
        return lo, hi, w

    # -- evaluation -------------------------------------------------------
    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise DomainError("profile evaluated at negative distance")
        p = self.params
        if self.family == "zero":
            out = np.zeros_like(t)
        elif self.family == "exponential":
            out = p["a"] * np.exp(-p["c"] * t)
        elif self.family == "power":
            out = p["a"] * np.power(1.0 + t, -p["s"])
        else:
            lo, hi, w = self._bump_edges()
            up = _smootherstep((t - lo) / w)
            down = _smootherstep((hi - t) / w)
            out = p["a"] * np.minimum(up, down)
        return out if out.ndim else float(out)

    def derivative(self, t):
        """Exact ``lam'(t)`` (one-sided choice is irrelevant: all families are C1)."""
        t = np.asarray(t, dtype=float)
        p = self.params
        if self.family == "zero":
            out = np.zeros_like(t)
        elif self.family == "exponential":
            out = -p["c"] * p["a"] * np.exp(-p["c"] * t)
        elif self.family == "power":
            out = -p["s"] * p["a"] * np.power(1.0 + t, -p["s"] - 1.0)
        else:
            lo, hi, w = self._bump_edges()
            xu, xd = (t - lo) / w, (hi - t) / w
            rising = _smootherstep(xu) < _smootherstep(xd)
            out = p["a"] / w * np.where(rising, _smootherstep_slope(xu), -_smootherstep_slope(xd))
        return out if out.ndim else float(out)

    def cumulative_mass(self, x):
        """Exact ``int_0^x lam(u) du``."""
        x = np.asarray(x, dtype=float)
        if np.any(x < 0):
            raise DomainError("cumulative mass needs x >= 0")
        p = self.params
        if self.family == "zero":
            out = np.zeros_like(x)
        elif self.family == "exponential":
            out = p["a"] / p["c"] * -np.expm1(-p["c"] * x)
        elif self.family == "power":
            s = p["s"]
            out = p["a"] / (s - 1.0) * -np.expm1((1.0 - s) * np.log1p(x))
        else:
            lo, hi, w = self._bump_edges()
            rise = w * _smootherstep_integral((x - lo) / w)
            flat = np.clip(x, lo + w, hi - w) - (lo + w)
            fall = w * (0.5 - _smootherstep_integral((hi - x) / w))
            fall = np.where(x > hi - w, fall, 0.0)
            out = p["a"] * (rise + flat + fall)
        return out if out.ndim else float(out)

    def mass(self):
        """Exact total mass ``b``."""
        p = self.params
        if self.family == "zero":
            return 0.0
        if self.family == "exponential":
            return p["a"] / p["c"]
        if self.family == "power":
            return p["a"] / (p["s"] - 1.0)
        lo, hi, w = self._bump_edges()
        return p["a"] * ((hi - lo) - w)

    def tail_cutoff(self, tol=1e-12):
        """A radius ``T`` with ``int_T^inf lam <= tol``."""
        p = self.params
        b = self.mass()
        if b <= tol:
            return 0.0
        if self.family == "exponential":
            return max(0.0, math.log(b / tol) / p["c"])
        if self.family == "power":
            # a/(s-1) (1+T)^(1-s) <= tol
            return max(0.0, (b / tol) ** (1.0 / (p["s"] - 1.0)) - 1.0)
        return self.params["t_hi"]

    def along_geodesic(self, d0):
        """Worst-case profile seen along a unit geodesic starting at distance d0.

        By the triangle inequality and monotonicity, ``lam(d(o, gamma(t)))`` is
        bounded by ``lam(|d0 - t|)``; the returned callable is that bound.
        """
        if not self.monotone:
            raise UnsupportedProfileError("geodesic transport needs a monotone profile")
        if d0 < 0:
            raise DomainError("d0 must be >= 0")
        return lambda t: self(np.abs(np.asarray(t, dtype=float) - d0))


def eval_lambda(profile, t):
    if np.any(np.asarray(t) < 0):
        raise DomainError("t must be >= 0")
    return profile(t)


def total_mass(profile):
    return profile.mass()


def mass_along_geodesic(profile, d0):
    """``int_0^inf lam(|d0 - t|) dt``, always at most twice the total mass."""
    if not profile.monotone:
        raise UnsupportedProfileError(
            f"{profile.label} is not monotone; geodesic mass bound does not apply"
        )
    if d0 < 0:
        raise DomainError("d0 must be >= 0")
    return profile.cumulative_mass(d0) + profile.mass()
