"""Kobayashi metric of the pseudo-egg and its indicatrix.

At an axis point ``(p, 0)`` with ``0 < p < 1`` the metric is one of two
closed forms, ``K1`` and ``K2``, chosen by the ratio

    w = p^2 |vhat|^2 / (m^2 |v_1|^2).

``K1`` applies for ``w <= w0`` and ``K2`` for ``w >= w0``, where the crossover
``w0`` lies strictly between ``1`` and ``1/(4m(1-m))``. Other points are
reduced to the axis with the automorphisms in :mod:`pseudoegg.domain`.
"""

import enum
import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from .domain import AXIS_GUARD, as_vector, minkowski_functional, normalize_point
from .exceptions import DomainError, RootNotBracketed
from .roots import sign_change_brackets, solve_bracketed

RADICAND_SLACK = 1e-14
T_CLAMP = 1e-14
CROSSOVER_CELLS = 1000
CROSSOVER_EDGE = 1e-9


class Regime(str, enum.Enum):
    K1 = "K1"
    K2 = "K2"
    MIN = "MIN"


class Branch(str, enum.Enum):
    UPPER = "UPPER"
    LOWER = "LOWER"


@dataclass
class KobayashiBreakdown:
    """Every intermediate of the axis formula, for inspection and serialization.

    ``w`` is ``None`` exactly when ``w_infinite`` is set (``v_1 = 0``).
    ``attained`` names the branch that produced ``value``.
    """

    p: float
    value: float
    regime: Regime
    attained: str = None
    w: float = None
    w_infinite: bool = False
    t: float = None
    alpha: float = None
    k1: float = None
    k2: float = None
    w0: float = None
    t0: float = None
    x0: float = None

    def as_dict(self):
        d = asdict(self)
        d["regime"] = self.regime.value
        return d


@dataclass(frozen=True)
class KCurveSample:
    alpha: float
    x: float
    y: float
    branch: Branch


def _check_axis(p):
    if not 0.0 <= p < 1.0 - AXIS_GUARD:
        raise DomainError(f"axis coordinate p must lie in [0, 1), got {p!r}")


def compute_w(params, p, v):
    """The ratio ``w``; returns ``math.inf`` when ``v_1 = 0``."""
    v = as_vector(params, v)
    a1 = abs(v[0]) ** 2
    b2 = float(np.vdot(v[1:], v[1:]).real)
    if a1 == 0.0:
        if b2 == 0.0:
            raise DomainError("w is undefined for the zero vector")
        return math.inf
    return p * p * b2 / (params.m ** 2 * a1)


def compute_t(params, w):
    m = params.m
    rad = 1.0 + 4.0 * m * (m - 1.0) * w
    if rad < -RADICAND_SLACK:
        raise DomainError(f"w={w!r} exceeds 1/(4m(1-m)); t is undefined")
    rad = max(rad, 0.0)
    t = 2.0 * m * m * w / (1.0 + 2.0 * m * (m - 1.0) * w + math.sqrt(rad))
    t_top = m / (1.0 - m)
    if abs(t - t_top) < T_CLAMP:
        t = t_top
    if abs(t) < T_CLAMP:
        t = max(t, 0.0)
    return t


def _alpha_residual(m, p, t):
    p2m = p ** (2 * m)

    def f(a):
        return a ** (2 * m) - t * a ** (2 * m - 2) - (1.0 - t) * p2m

    def df(a):
        return 2 * m * a ** (2 * m - 1) - t * (2 * m - 2) * a ** (2 * m - 3)

    return f, df


def solve_alpha(params, p, t):
    """Root in ``(0, 1)`` of ``a^{2m} - t a^{2m-2} - (1-t) p^{2m}``.

    The left side is increasing in ``a``; it equals ``p^{2m}`` times
    ``(1 - t)`` below zero at ``a = p`` when ``t > 0``, so the root is
    bracketed by ``[p, 1]``.
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p!r}")
    if not 0.0 <= t < 1.0:
        raise DomainError(f"t must lie in [0, 1), got {t!r}")
    if t == 0.0:
        return p
    f, df = _alpha_residual(params.m, p, t)
    hi = 1.0
    if f(hi) <= 0.0:
        raise RootNotBracketed(f"alpha equation has no root below 1 for t={t!r}")
    return solve_bracketed(f, df, p, hi)


def k1(params, p, v, t, alpha):
    m = params.m
    return m * alpha * (1.0 - t) * abs(v[0]) / (p * (1.0 - alpha * alpha) * (m * (1.0 - t) + t))


def k2(params, p, v):
    v = np.asarray(v, dtype=complex)
    m = params.m
    p2m = p ** (2 * m)
    b2 = float(np.vdot(v[1:], v[1:]).real)
    # written with p^{2m-2} = p^{2m}/p^2 folded in to stay finite as p -> 0
    first = (m * m * p ** (2 * m - 2) * abs(v[0]) ** 2 / (1.0 - p2m) ** 2) if v[0] != 0 else 0.0
    return math.sqrt(first + b2 / (1.0 - p2m))


def crossover_equation(params, p):
    """The degree-mixed polynomial whose admissible root is ``x0``."""
    m = params.m
    P = p ** (2 * m)
    c4m = -(1.0 - m) ** 2
    c4m2 = -1.0 - 2.0 * m + 2.0 * m * m + P
    c4m4 = -m * m
    c2m = 1.0 - (2.0 * m - 1.0) * P
    c2m2 = 1.0 + (2.0 * m - 1.0) * P

    def f(x):
        return (c4m * x ** (4 * m) + c4m2 * x ** (4 * m - 2) + c4m4 * x ** (4 * m - 4)
                + c2m * x ** (2 * m) + c2m2 * x ** (2 * m - 2) - P)

    def df(x):
        return (c4m * 4 * m * x ** (4 * m - 1) + c4m2 * (4 * m - 2) * x ** (4 * m - 3)
                + c4m4 * (4 * m - 4) * x ** (4 * m - 5) + c2m * 2 * m * x ** (2 * m - 1)
                + c2m2 * (2 * m - 2) * x ** (2 * m - 3))

    return f, df


def crossover_from_x0(params, p, x0):
    m = params.m
    P = p ** (2 * m)
    t0 = (x0 ** (2 * m) - P) / (x0 ** (2 * m - 2) - P)
    w0 = t0 / (m + (1.0 - m) * t0) ** 2
    return t0, w0


def _crossover_consistent(params, p, x0, t0, w0):
    if not 1.0 < w0 < params.w_max:
        return False
    if abs(compute_t(params, w0) - t0) > 1e-8:
        return False
    v = _direction_with_w(params, p, w0)
    alpha = solve_alpha(params, p, t0)
    a = k1(params, p, v, t0, alpha)
    b = k2(params, p, v)
    return abs(a - b) <= 1e-7 * b


def _direction_with_w(params, p, w):
    vec = np.zeros(params.n, dtype=complex)
    vec[0] = 1.0
    vec[1] = params.m * math.sqrt(w) / p
    return vec


@lru_cache(maxsize=4096)
def _crossover_cached(n, m, p):
    from .domain import EggParams
    params = EggParams(n, m)
    f, df = crossover_equation(params, p)
    lo, hi = p + CROSSOVER_EDGE, 1.0 - CROSSOVER_EDGE
    # x = 1 is always a root of the equation; it is rejected by the filter
    for a, b in sign_change_brackets(f, lo, hi, CROSSOVER_CELLS):
        x0 = a if a == b else solve_bracketed(f, df, a, b)
        t0, w0 = crossover_from_x0(params, p, x0)
        if _crossover_consistent(params, p, x0, t0, w0):
            return x0, t0, w0
    raise RootNotBracketed(f"no admissible crossover root for m={m!r}, p={p!r}")


def solve_crossover(params, p):
    """Return ``(x0, t0, w0)`` for the axis point ``(p, 0)``.

    Candidate roots come from a sign-change scan of ``(p, 1)``; the first one
    whose ``w0`` lies in ``(1, 1/(4m(1-m)))`` and makes ``K1 = K2`` at ratio
    ``w0`` is returned.
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p!r}")
    # n does not enter the crossover; key the cache on 2 to share entries
    return _crossover_cached(2, float(params.m), float(p))


def kobayashi_axis(params, p, v):
    """Kobayashi metric at ``(p, 0)``; returns ``(value, breakdown)``."""
    p = float(p)
    _check_axis(p)
    v = as_vector(params, v)
    if not np.any(v):
        return 0.0, KobayashiBreakdown(p=p, value=0.0, regime=Regime.K1, attained="ZERO")
    if p == 0.0:
        q = minkowski_functional(params, v)
        return q, KobayashiBreakdown(p=p, value=q, regime=Regime.MIN, attained="GAUGE")

    b = KobayashiBreakdown(p=p, value=0.0, regime=Regime.K1)
    b.k2 = k2(params, p, v)
    w = compute_w(params, p, v)
    if math.isinf(w):
        b.w_infinite = True
        b.regime = Regime.K2
        b.attained = "K2"
        b.value = b.k2
        return b.value, b
    b.w = w
    if w >= params.w_max:
        b.regime = Regime.K2
        b.attained = "K2"
        b.value = b.k2
        return b.value, b

    b.t = compute_t(params, w)
    b.alpha = solve_alpha(params, p, b.t)
    b.k1 = k1(params, p, v, b.t, b.alpha)
    if w <= 1.0:
        b.regime = Regime.K1
        b.attained = "K1"
        b.value = b.k1
        return b.value, b

    b.regime = Regime.MIN
    b.x0, b.t0, b.w0 = solve_crossover(params, p)
    if b.k1 < b.k2:
        b.attained, b.value = "K1", b.k1
    else:
        b.attained, b.value = "K2", b.k2
    return b.value, b


def kobayashi_general(params, z, v, unitary=None):
    """Kobayashi metric at an arbitrary point, by transport to the axis."""
    phi, q = normalize_point(params, z, unitary)
    z = np.asarray(z, dtype=complex)
    dv = phi.jacobian(z) @ as_vector(params, v)
    return kobayashi_axis(params, q, dv)[0]


def upper_curve(params, p, alpha):
    """Square coordinates ``(x, y)`` of the upper K-curve at parameter ``alpha``."""
    m = params.m
    alpha = np.asarray(alpha, dtype=float)
    P = p ** (2 * m)
    x = 1.0 + (p ** (4 * m) - P * alpha ** (2 * m - 2) - P * alpha ** (2 * m)) / alpha ** (4 * m - 2)
    y = (p * (m * alpha ** (2 * m - 2) - (m - 1.0) * alpha ** (2 * m) - P) / (m * alpha ** (2 * m - 1))) ** 2
    return x, y


def lower_curve_y(params, p, x):
    """``y`` on the affine lower K-curve as a function of ``x``."""
    m = params.m
    P = p ** (2 * m)
    return (1.0 - P) ** 2 / (m * m * p ** (2 * m - 2)) * (1.0 - np.asarray(x) / (1.0 - P))


def _equidistributed_alpha(params, p, x0, count):
    # place parameters at equal arc length of the upper curve in (x, y)
    fine = np.linspace(p, x0, 32 * count + 1)
    x, y = upper_curve(params, p, fine)
    seg = np.hypot(np.diff(x), np.diff(y))
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    targets = np.linspace(0.0, arc[-1], count)
    alpha = np.interp(targets, arc, fine)
    alpha[0], alpha[-1] = p, x0
    return alpha


def indicatrix_boundary(params, p, count):
    """Boundary of the Kobayashi indicatrix at ``(p, 0)`` in square coordinates.

    Returns ``count`` samples: roughly half on the upper K-curve, ordered from
    ``alpha = p`` (the ``v_1``-axis) to ``alpha = x0`` (the crossover), and
    the rest on the lower K-curve from the crossover to the ``vhat``-axis.
    """
    if count < 16:
        raise ValueError("indicatrix_boundary needs count >= 16")
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p!r}")
    m = params.m
    x0, _, _ = solve_crossover(params, p)
    n_up = count // 2
    n_low = count - n_up
    alpha = _equidistributed_alpha(params, p, x0, n_up)
    x, y = upper_curve(params, p, alpha)
    x[0] = 0.0
    y[0] = (1.0 - p * p) ** 2
    samples = [KCurveSample(float(a), float(xx), float(yy), Branch.UPPER)
               for a, xx, yy in zip(alpha, x, y)]
    x_end = 1.0 - p ** (2 * m)
    xs = np.linspace(x[-1], x_end, n_low + 1)[1:]
    ys = lower_curve_y(params, p, xs)
    ys[-1] = 0.0
    samples.extend(KCurveSample(float(x0), float(xx), float(max(yy, 0.0)), Branch.LOWER)
                   for xx, yy in zip(xs, ys))
    return samples


def square_convexity_check(params, p, count):
    """Discrete strict convexity of ``y(x)`` along the upper K-curve.

    Uses divided-difference slopes on the sampled curve; the curve is convex
    when those slopes strictly increase. Returns a report dict.
    """
    if count < 64:
        raise ValueError("insufficient samples: square_convexity_check needs count >= 64")
    x0, _, _ = solve_crossover(params, p)
    alpha = np.linspace(p, x0, count)
    x, y = upper_curve(params, p, alpha)
    order = np.argsort(x)
    x, y = x[order], y[order]
    slopes = np.diff(y) / np.diff(x)
    second = np.diff(slopes) / (0.5 * (x[2:] - x[:-2]))
    scale = max(abs(slopes).max(), 1.0)
    tol = 1e-10 * scale
    return {
        "is_convex": bool(np.all(second > -tol) and np.all(np.diff(x) > 0)),
        "min_second_difference": float(second.min()),
    }
