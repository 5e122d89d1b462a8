"""Bracketed scalar root finding.

Bisection is used as the primary method because several equations in this
package carry negative exponents that blow up near the left end of their
bracket; Newton is only ever applied as a final polish and is rejected if it
leaves the bracket or fails to reduce the residual.
"""

import math

import numpy as np

from .exceptions import RootNotBracketed

MAXIT = 400


def bisect(func, lo, hi, xtol=1e-14, rtol=0.0):
    """Find a root of ``func`` on ``[lo, hi]`` by bisection.

    ``func(lo)`` and ``func(hi)`` must differ in sign (or one of them must be
    zero). Iteration stops once the bracket width falls below
    ``xtol + rtol * |mid|`` or an exact zero is hit.
    """
    flo = func(lo)
    fhi = func(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise RootNotBracketed(
            f"no sign change on [{lo!r}, {hi!r}]: f={flo!r}, {fhi!r}")
    for _ in range(MAXIT):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fmid = func(mid)
        if fmid == 0.0:
            return mid
        if np.sign(fmid) == np.sign(flo):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
        if hi - lo <= xtol + rtol * abs(mid):
            break
    return 0.5 * (lo + hi)


def newton_polish(func, dfunc, x, lo, hi, steps=3):
    """Refine a bracketed estimate ``x`` with a few guarded Newton steps.

    A step is accepted only if it stays inside ``[lo, hi]`` and does not
    increase ``|func|``.
    """
    fx = func(x)
    for _ in range(steps):
        if fx == 0.0:
            break
        d = dfunc(x)
        if d == 0.0 or not math.isfinite(d):
            break
        cand = x - fx / d
        if not lo <= cand <= hi:
            break
        fc = func(cand)
        if abs(fc) >= abs(fx):
            break
        x, fx = cand, fc
    return x


def solve_bracketed(func, dfunc, lo, hi, xtol=1e-14):
    """Bisection to width ``xtol`` followed by :func:`newton_polish`."""
    x = bisect(func, lo, hi, xtol=xtol)
    if dfunc is None:
        return x
    return newton_polish(func, dfunc, x, lo, hi)


def sign_change_brackets(func, lo, hi, count=1000):
    """Split ``[lo, hi]`` into ``count`` cells and return those with a sign change.

    ``func`` must accept a numpy array. Cells whose endpoint value is exactly
    zero are returned as degenerate brackets ``(x, x)``.
    """
    xs = np.linspace(lo, hi, count + 1)
    fs = func(xs)
    out = []
    for i in range(count):
        a, b = fs[i], fs[i + 1]
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        if a == 0.0:
            out.append((xs[i], xs[i]))
        elif a * b < 0.0:
            out.append((xs[i], xs[i + 1]))
    if fs[-1] == 0.0:
        out.append((xs[-1], xs[-1]))
    return out
