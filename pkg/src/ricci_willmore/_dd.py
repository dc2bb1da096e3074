"""Double-double (compensated) arithmetic.

Values are unevaluated sums ``hi + lo`` with ``|lo| <= ulp(hi)/2``, giving
about 32 significant digits.  The scalar kernels are numba-compiled when
numba is importable; the array helpers are plain numpy and are used for
post-processing solver output.
"""
import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

_SPLITTER = 134217729.0  # 2**27 + 1


@njit(cache=True, inline="always")
def two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@njit(cache=True, inline="always")
def quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


@njit(cache=True, inline="always")
def split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


@njit(cache=True, inline="always")
def two_prod(a, b):
    p = a * b
    ah, al = split(a)
    bh, bl = split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


@njit(cache=True, inline="always")
def dd_add(ah, al, bh, bl):
    s, e = two_sum(ah, bh)
    t, f = two_sum(al, bl)
    e += t
    s, e = quick_two_sum(s, e)
    e += f
    return quick_two_sum(s, e)


@njit(cache=True, inline="always")
def dd_mul_d(ah, al, b):
    p, e = two_prod(ah, b)
    e += al * b
    return quick_two_sum(p, e)


# -- vectorised numpy versions ----------------------------------------------

def _two_sum_v(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _quick_two_sum_v(a, b):
    s = a + b
    return s, b - (s - a)


def _two_prod_v(a, b):
    p = a * b
    t = _SPLITTER * a
    ah = t - (t - a)
    al = a - ah
    t = _SPLITTER * b
    bh = t - (t - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def add(ah, al, bh, bl):
    s, e = _two_sum_v(ah, bh)
    t, f = _two_sum_v(al, bl)
    e = e + t
    s, e = _quick_two_sum_v(s, e)
    e = e + f
    return _quick_two_sum_v(s, e)


def neg(ah, al):
    return -ah, -al


def mul(ah, al, bh, bl):
    p, e = _two_prod_v(ah, bh)
    e = e + (ah * bl + al * bh)
    return _quick_two_sum_v(p, e)


def div(ah, al, bh, bl):
    """Quotient of two double-double arrays (three-term long division)."""
    q1 = ah / bh
    ph, pl = mul(bh, bl, q1, np.zeros_like(q1))
    rh, rl = add(ah, al, -ph, -pl)
    q2 = rh / bh
    ph, pl = mul(bh, bl, q2, np.zeros_like(q2))
    rh, rl = add(rh, rl, -ph, -pl)
    q3 = rh / bh
    qh, ql = _quick_two_sum_v(q1, q2)
    return add(qh, ql, q3, np.zeros_like(q3))
