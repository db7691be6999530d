"""Gamma and Gauss hypergeometric functions on the ranges the coverage
formulas need (real arguments, ``z <= 0`` for 2F1)."""
import math

from .errors import DomainError

_SERIES_TOL = 1e-17
_MAX_TERMS = 2_000_000


def _is_nonpositive_integer(x):
    return x <= 0 and float(x).is_integer()


def gamma_fn(x):
    """Euler's Gamma function for real ``x``; raises at the poles 0, -1, -2, ..."""
    x = float(x)
    if _is_nonpositive_integer(x):
        raise DomainError(f"Gamma has a pole at {x}")
    # libm's tgamma is accurate to a few ulp on (0, 10]
    return math.gamma(x)


def _series(a, b, c, z):
    """Plain hypergeometric series, for |z| < 1 (or terminating)."""
    term = 1.0
    total = 1.0
    comp = 0.0
    for k in range(_MAX_TERMS):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if term == 0.0:
            return total
        if abs(term) <= _SERIES_TOL * abs(total) and k > 2:
            return total
    raise DomainError(f"2F1({a}, {b}; {c}; {z}) series did not converge")


def _near_one(a, b, c, w):
    """Gauss connection to ``1 - w``; needs ``c - a - b`` non-integer."""
    g = gamma_fn
    s = c - a - b
    first = 0.0
    if not (_is_nonpositive_integer(c - a) or _is_nonpositive_integer(c - b)):
        first = g(c) * g(s) / (g(c - a) * g(c - b)) * _series(a, b, 1.0 - s, 1.0 - w)
    second = 0.0
    if not (_is_nonpositive_integer(a) or _is_nonpositive_integer(b)):
        second = ((1.0 - w) ** s * g(c) * g(-s) / (g(a) * g(b))
                  * _series(c - a, c - b, s + 1.0, 1.0 - w))
    return first + second


def gauss_2f1(a, b, c, z):
    """Gauss hypergeometric function 2F1(a, b; c; z) for real ``z <= 0``.

    For ``z < -1/2`` a Pfaff transformation maps the argument to
    ``w = z / (z - 1)`` in ``[1/3, 1)``; when ``w`` crowds 1 the
    ``1 - w`` connection formula takes over.
    """
    a, b, c, z = float(a), float(b), float(c), float(z)
    if _is_nonpositive_integer(c):
        raise DomainError(f"2F1 undefined for c = {c}")
    if z > 0:
        raise DomainError("gauss_2f1 only handles z <= 0")
    if z == 0.0 or a == 0.0 or b == 0.0:
        return 1.0
    if z >= -0.5:
        return _series(a, b, c, z)

    w = z / (z - 1.0)
    # pick the Pfaff form whose series has the larger exponent excess at w=1
    if a >= b:
        pref, A, B = (1.0 - z) ** (-b), c - a, b
    else:
        pref, A, B = (1.0 - z) ** (-a), a, c - b
    if _is_nonpositive_integer(A) or _is_nonpositive_integer(B) or w <= 0.9:
        return pref * _series(A, B, c, w)
    excess = c - A - B
    if not float(excess).is_integer():
        return pref * _near_one(A, B, c, w)
    if excess <= 0:
        raise DomainError(f"2F1({a}, {b}; {c}; {z}) not handled (log case)")
    return pref * _series(A, B, c, w)
