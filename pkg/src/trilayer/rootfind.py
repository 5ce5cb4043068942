"""Bracketed scalar root finding: Brent's method plus geometric bracket growth.

Function evaluations are expensive here (each one typically integrates one or
two radial arcs), so endpoint values can be passed in to avoid recomputing
them, and ``grow_bracket`` doubles an interval outward until it encloses a
sign change.
"""

from __future__ import annotations

import math
from typing import Callable

from .errors import BracketNotFound

_EPS = 2.220446049250313e-16


def brent(
    f: Callable[[float], float],
    a: float,
    b: float,
    *,
    fa: float | None = None,
    fb: float | None = None,
    rtol: float = 1e-12,
    xtol: float = 0.0,
    maxiter: int = 200,
) -> float:
    """Find a root of f in [a, b] where f(a) and f(b) have opposite signs.

    Bisection safeguarded by inverse-quadratic/secant steps (Brent).  The
    bracket is shrunk until its width is below xtol + max(rtol, 4*eps)*|x|.
    Exact zeros at the endpoints are returned immediately.
    """
    if a > b:
        a, b = b, a
        fa, fb = fb, fa
    fa = f(a) if fa is None else fa
    if fa == 0.0:
        return a
    fb = f(b) if fb is None else fb
    if fb == 0.0:
        return b
    if (fa > 0.0) == (fb > 0.0):
        raise BracketNotFound(f"no sign change on [{a}, {b}]: f = ({fa}, {fb})")

    rtol = max(rtol, 4.0 * _EPS)
    c, fc = a, fa
    e = d = b - a
    for _ in range(maxiter):
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol = 0.5 * (xtol + rtol * abs(b))
        m = 0.5 * (c - b)
        if abs(m) <= tol or fb == 0.0:
            return b
        if abs(e) < tol or abs(fa) <= abs(fb):
            e = d = m
        else:
            s = fb / fa
            if a == c:
                p = 2.0 * m * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0.0:
                q = -q
            else:
                p = -p
            s, e = e, d
            if 2.0 * p < 3.0 * m * q - abs(tol * q) and p < abs(0.5 * s * q):
                d = p / q
            else:
                e = d = m
        a, fa = b, fb
        if abs(d) > tol:
            b += d
        elif m > 0.0:
            b += tol
        else:
            b -= tol
        fb = f(b)
        if fb == 0.0:
            return b
        if (fb > 0.0) == (fc > 0.0):
            c, fc = a, fa
            e = d = b - a
    return b


def grow_bracket(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    flo: float | None = None,
    factor: float = 2.0,
    max_hi: float = math.inf,
) -> tuple[float, float, float, float]:
    """Grow [lo, hi] upward by ``factor`` until f changes sign.

    Returns (a, b, fa, fb).  Raises BracketNotFound once hi would exceed
    ``max_hi`` without a sign change.
    """
    flo = f(lo) if flo is None else flo
    if flo == 0.0:
        return lo, lo, 0.0, 0.0
    a, fa = lo, flo
    b = hi
    while True:
        fb = f(b)
        if fb == 0.0 or (fa > 0.0) != (fb > 0.0):
            return a, b, fa, fb
        if b >= max_hi:
            raise BracketNotFound(
                f"no sign change up to {max_hi}: f({lo}) = {flo}, f({b}) = {fb}"
            )
        a, fa = b, fb
        b = min(b * factor, max_hi)
