import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq

from pseudoegg import domain as dm
from pseudoegg import kobayashi as kb
from pseudoegg.exceptions import DomainError

P_VALUES = (0.1, 0.3, 0.5, 0.7, 0.9)


def _vec(n, v1, vhat_norm):
    v = np.zeros(n, dtype=complex)
    v[0] = v1
    v[1] = vhat_norm
    return v


def _vec_with_w(params, p, w):
    return _vec(params.n, 1.0, params.m * math.sqrt(w) / p)


def test_compute_w_definition():
    params = dm.EggParams(2, 0.25)
    p = 0.5
    v = _vec(2, 1.0, 0.3)
    assert kb.compute_w(params, p, v) == pytest.approx((p * 0.3 / (0.25 * 1.0)) ** 2)
    assert math.isinf(kb.compute_w(params, p, _vec(2, 0.0, 1.0)))
    with pytest.raises(DomainError):
        kb.compute_w(params, p, np.zeros(2))


def test_compute_t_range(params):
    for w in np.linspace(0.0, params.w_max, 50):
        t = kb.compute_t(params, w)
        assert 0.0 <= t <= params.m / (1 - params.m) + 1e-14
    with pytest.raises(DomainError):
        kb.compute_t(params, params.w_max * 1.01)


def test_compute_t_solves_its_quadratic(params):
    # w = t / (m + (1-m) t)^2 is the inverse relation on the admissible branch
    for w in np.linspace(0.01, params.w_max, 20):
        t = kb.compute_t(params, w)
        assert t / (params.m + (1 - params.m) * t) ** 2 == pytest.approx(w, rel=1e-12)


def test_alpha_matches_brentq(params):
    m = params.m
    for p in P_VALUES:
        for t in (1e-3, 0.1, 0.5 * m / (1 - m), m / (1 - m)):
            f = lambda a: a ** (2 * m) - t * a ** (2 * m - 2) - (1 - t) * p ** (2 * m)
            ref = brentq(f, p, 1.0, xtol=1e-16, rtol=1e-15)
            assert kb.solve_alpha(params, p, t) == pytest.approx(ref, rel=1e-12)


def test_alpha_high_precision():
    params = dm.EggParams(2, 0.1)
    p, t = 0.3, 0.07
    mpmath.mp.dps = 40
    m = mpmath.mpf("0.1")
    f = lambda a: a ** (2 * m) - t * a ** (2 * m - 2) - (1 - t) * mpmath.mpf(p) ** (2 * m)
    ref = mpmath.findroot(f, (mpmath.mpf(p), mpmath.mpf(1)), solver="anderson")
    assert kb.solve_alpha(params, p, t) == pytest.approx(float(ref), rel=1e-14)


def test_crossover_against_direct_K1_equals_K2(params):
    # w0 found from the polynomial must be where K1 and K2 meet as functions of w
    for p in P_VALUES:
        _, _, w0 = kb.solve_crossover(params, p)

        def gap(w):
            v = _vec_with_w(params, p, w)
            t = kb.compute_t(params, w)
            return kb.k1(params, p, v, t, kb.solve_alpha(params, p, t)) - kb.k2(params, p, v)

        ref = brentq(gap, 1.0 + 1e-9, params.w_max * (1 - 1e-12), xtol=1e-15)
        assert w0 == pytest.approx(ref, rel=1e-8)


def test_crossover_equation_spurious_unit_root(params):
    f, _ = kb.crossover_equation(params, 0.5)
    assert abs(f(1.0)) < 1e-14
    x0, _, _ = kb.solve_crossover(params, 0.5)
    assert 0.5 < x0 < 1.0


def test_origin_is_gauge(params, rng):
    for _ in range(10):
        v = rng.normal(size=params.n) + 1j * rng.normal(size=params.n)
        a, b = abs(v[0]), np.linalg.norm(v[1:])
        g = lambda s: a ** (2 * params.m) * s ** (-2 * params.m) + b * b / s**2 - 1.0
        ref = brentq(g, 1e-3, 1e3, xtol=1e-15, rtol=1e-15)
        value, breakdown = kb.kobayashi_axis(params, 0.0, v)
        assert value == pytest.approx(ref, rel=1e-12)
        assert breakdown.attained == "GAUGE"


def test_product_domain_upper_bound(params):
    # E contains {|z1| < r} x {|zhat| < 1/sqrt2} with r = 2^{-1/2m}
    r = 2.0 ** (-1.0 / (2 * params.m))
    for frac in (0.1, 0.5, 0.9):
        p = frac * r
        for v1, vh in ((1.0, 0.0), (1.0, 0.3), (0.2, 1.0), (0.0, 1.0)):
            v = _vec(params.n, v1, vh)
            bound = max(abs(v1) * r / (r * r - p * p), math.sqrt(2.0) * vh)
            assert kb.kobayashi_axis(params, p, v)[0] <= bound * (1 + 1e-12)


def test_ball_lower_bound(params, rng):
    for p in P_VALUES:
        for _ in range(10):
            v = rng.normal(size=params.n) + 1j * rng.normal(size=params.n)
            s = 1 - p * p
            ball = math.sqrt(s * np.vdot(v, v).real + (p * abs(v[0])) ** 2) / s
            assert kb.kobayashi_axis(params, p, v)[0] >= ball * (1 - 1e-12)


def test_regimes_and_breakdown():
    params = dm.EggParams(2, 0.25)
    p = 0.5
    value, b = kb.kobayashi_axis(params, p, _vec_with_w(params, p, 0.5))
    assert b.regime is kb.Regime.K1 and value == b.k1 and b.w0 is None
    value, b = kb.kobayashi_axis(params, p, _vec(2, 0.0, 1.0))
    assert b.regime is kb.Regime.K2 and b.w_infinite and b.w is None
    _, _, w0 = kb.solve_crossover(params, p)
    value, b = kb.kobayashi_axis(params, p, _vec_with_w(params, p, 0.5 * (1 + w0)))
    assert b.regime is kb.Regime.MIN and b.attained == "K1" and value == b.k1
    value, b = kb.kobayashi_axis(params, p, _vec_with_w(params, p, 0.5 * (w0 + params.w_max)))
    assert b.attained == "K2" and value == b.k2
    assert set(b.as_dict()) >= {"value", "regime", "w", "t", "alpha", "w0", "t0", "x0"}


def test_continuity_in_direction(params):
    # K is continuous; scan w through every regime boundary
    p = 0.5
    ws = np.concatenate([np.linspace(0.2, params.w_max * 1.5, 3001)])
    vals = np.array([kb.kobayashi_axis(params, p, _vec_with_w(params, p, w))[0] for w in ws])
    jumps = np.abs(np.diff(vals)) / vals[:-1]
    assert jumps.max() < 1e-2


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 0.45), st.floats(0.05, 0.95), st.floats(-2, 2), st.floats(-2, 2),
       st.floats(-2, 2), st.floats(0.1, 10))
def test_homogeneity_property(m, p, a, b, c, lam):
    params = dm.EggParams(2, m)
    v = np.array([complex(a, b), c])
    if np.linalg.norm(v) < 1e-6:
        return
    k = kb.kobayashi_axis(params, p, v)[0]
    assert kb.kobayashi_axis(params, p, lam * 1j * v)[0] == pytest.approx(lam * k, rel=1e-11)


def test_general_invariance(params, rng):
    for _ in range(20):
        z = dm.sample_points(params, 1, rng, shrink=0.9)[0]
        b = dm.sample_points(params, 1, rng, shrink=0.9)[0]
        phi = dm.normalizing_automorphism(params, b)
        if dm.defining_function(params, phi(z)) > 0.95:
            continue
        v = rng.normal(size=params.n) + 1j * rng.normal(size=params.n)
        a = kb.kobayashi_general(params, z, v)
        assert kb.kobayashi_general(params, phi(z), phi.jacobian(z) @ v) == pytest.approx(a, rel=1e-8)


def test_indicatrix_boundary_samples_have_unit_length():
    params = dm.EggParams(3, 0.25)
    samples = kb.indicatrix_boundary(params, 0.5, 64)
    assert len(samples) == 64
    assert samples[0].x == 0.0 and samples[-1].y == 0.0
    for s in samples:
        v = _vec(3, math.sqrt(s.y), math.sqrt(s.x))
        assert kb.kobayashi_axis(params, 0.5, v)[0] == pytest.approx(1.0, abs=1e-10)


def test_square_convexity(params):
    report = kb.square_convexity_check(params, 0.5, 256)
    assert report["is_convex"]
    with pytest.raises(ValueError, match="insufficient"):
        kb.square_convexity_check(params, 0.5, 10)


def test_axis_guards():
    params = dm.EggParams(2, 0.25)
    with pytest.raises(DomainError):
        kb.kobayashi_axis(params, 1.0, [1, 0])
    with pytest.raises(DomainError):
        kb.kobayashi_axis(params, -0.1, [1, 0])
    assert kb.kobayashi_axis(params, 0.3, [0, 0])[0] == 0.0
