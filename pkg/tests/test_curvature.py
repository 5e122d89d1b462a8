import math

import mpmath
import numpy as np
import pytest

from pseudoegg import curvature as cv
from pseudoegg import domain as dm
from pseudoegg.exceptions import DomainError

P_VALUES = (0.1, 0.3, 0.5, 0.7, 0.9)


def _mp_metric(m, x):
    # Wu coefficients for n = 2 as functions of the real coordinates
    z1 = mpmath.mpc(x[0], x[1])
    z2 = mpmath.mpc(x[2], x[3])
    a1 = z1.real ** 2 + z1.imag ** 2
    s = 1 - (z2.real ** 2 + z2.imag ** 2)
    S = s ** (1 / m)
    den = (S - a1) ** 2
    h12 = s ** (1 / m - 1) / (m * den) * mpmath.conj(z1) * z2
    h22 = (s ** (1 / m - 2) * a1 / (m * m * den) + 1 / (s * (s - a1 ** m))) * abs(z2) ** 2 \
        + 1 / (s - a1 ** m)
    return [[S / den, h12], [mpmath.conj(h12), h22]]


def _mp_curvature(m, z):
    """Curvature tensor from extended-precision derivatives (n = 2)."""
    mpmath.mp.dps = 40
    m = mpmath.mpf(m)
    x0 = [mpmath.mpf(float(c)) for w in z for c in (w.real, w.imag)]

    def partial(i, j, orders):
        return mpmath.diff(lambda *x: _mp_metric(m, x)[i][j], x0, orders)

    def unit(k):
        o = [0, 0, 0, 0]
        o[k] += 1
        return tuple(o)

    def two(a, b):
        o = [0, 0, 0, 0]
        o[a] += 1
        o[b] += 1
        return tuple(o)

    g = mpmath.matrix(2, 2)
    dz = {}
    dzb = {}
    dd = {}
    for i in range(2):
        for j in range(2):
            g[i, j] = _mp_metric(m, x0)[i][j]
            for k in range(2):
                fx, fy = partial(i, j, unit(2 * k)), partial(i, j, unit(2 * k + 1))
                dz[i, j, k] = (fx - 1j * fy) / 2
                dzb[i, j, k] = (fx + 1j * fy) / 2
            for k in range(2):
                for l in range(2):
                    xx = partial(i, j, two(2 * k, 2 * l))
                    yy = partial(i, j, two(2 * k + 1, 2 * l + 1))
                    xy = partial(i, j, two(2 * k, 2 * l + 1))
                    yx = partial(i, j, two(2 * k + 1, 2 * l))
                    dd[i, j, k, l] = (xx + 1j * xy - 1j * yx + yy) / 4
    # g^{a bbar} is the (b, a) entry of the inverse matrix
    ginv = g ** -1
    r = np.zeros((2,) * 4, dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    acc = -dd[i, j, k, l]
                    for a in range(2):
                        for b in range(2):
                            acc += ginv[b, a] * dz[i, b, k] * dzb[a, j, l]
                    r[i, j, k, l] = complex(acc)
    return r


@pytest.mark.slow
def test_fd_tensor_against_extended_precision():
    params = dm.EggParams(2, 0.25)
    z = np.array([0.3 + 0.2j, 0.25 - 0.35j])
    ref = _mp_curvature(params.m, z)
    got = cv.curvature_tensor_fd(params, z).components
    assert np.max(np.abs(got - ref)) <= 1e-5 * np.max(np.abs(ref))


def test_closed_form_matches_fd(params):
    support = cv.closed_form_support(params.n)
    for p in P_VALUES:
        closed = cv.curvature_axis_closed_form(params, p).components
        z = np.zeros(params.n, dtype=complex)
        z[0] = p
        fd = cv.curvature_tensor_fd(params, z).components
        for idx in support:
            assert fd[idx] == pytest.approx(closed[idx], rel=1e-5)
        mask = np.ones(fd.shape, dtype=bool)
        for idx in support:
            mask[idx] = False
        assert np.max(np.abs(fd[mask])) <= 1e-7 * np.max(np.abs(closed))


def test_poincare_disc_calibration():
    # metric 1/(1-|z|^2)^2 on the disc: curvature -2 everywhere
    metric = lambda pts: (1.0 / (1.0 - np.abs(pts[:, 0]) ** 2) ** 2)[:, None, None].astype(complex)
    for z in (0.0, 0.3 + 0.4j, -0.7j):
        r, g = cv.curvature_tensor(metric, np.array([z]), 1e-3)
        assert cv.sectional(g, r, [1.0]) == pytest.approx(-2.0, abs=1e-7)


def test_ball_calibration(rng):
    params = dm.EggParams(3, 0.2)
    for _ in range(20):
        z = rng.normal(size=3) + 1j * rng.normal(size=3)
        z *= 0.9 * rng.uniform() / np.linalg.norm(z)
        t = cv.ball_tensor(params, z)
        xi = rng.normal(size=3) + 1j * rng.normal(size=3)
        assert cv.sectional(t.metric, t.components, xi) == pytest.approx(-2.0, abs=1e-6)


def test_hsc_bound_and_variation(params):
    rep = cv.hsc_bound_scan(params, P_VALUES, 200)
    assert rep["passes"]
    assert rep["max_hsc"] <= -0.5
    assert rep["max_hsc"] - rep["min_hsc"] >= 0.1


def test_hsc_methods_agree():
    params = dm.EggParams(2, 0.4)
    z = np.array([0.6, 0.0])
    for xi in ([1, 0], [0, 1], [1, 1j], [2, -1]):
        assert cv.hsc(params, z, xi, "fd") == pytest.approx(cv.hsc(params, z, xi, "closed"), rel=1e-5)


def test_hsc_invariance(rng):
    params = dm.EggParams(2, 0.25)
    done = 0
    while done < 10:
        z = dm.sample_points(params, 1, rng, shrink=0.9)[0]
        phi = dm.normalizing_automorphism(params, dm.sample_points(params, 1, rng, shrink=0.9)[0])
        w = phi(z)
        if dm.defining_function(params, w) > 0.95 or min(abs(z[0]), abs(w[0])) < 1e-2:
            continue
        xi = rng.normal(size=2) + 1j * rng.normal(size=2)
        a = cv.hsc(params, z, xi, "fd")
        assert cv.hsc(params, w, phi.jacobian(z) @ xi, "fd") == pytest.approx(a, rel=1e-5)
        done += 1


def test_hsc_rejects_Z_and_zero_direction():
    params = dm.EggParams(2, 0.25)
    with pytest.raises(DomainError):
        cv.hsc(params, [0.0, 0.3], [1, 0])
    with pytest.raises(DomainError):
        cv.hsc(params, [0.3, 0.0], [0, 0])


def test_hermitian_symmetry_off_axis(rng):
    params = dm.EggParams(3, 0.25)
    z = np.array([0.2 + 0.1j, 0.3j, -0.2])
    t = cv.curvature_tensor_fd(params, z)
    assert t.hermitian_residual() <= 1e-8 * np.max(np.abs(t.components))


def test_comparison(params, rng):
    rep = cv.comparison_check(params, 500, rng)
    assert rep["passes"]
    assert rep["origin_difference"] == 0.0


def test_sphere_directions():
    d = cv.sphere_directions(3, 500)
    assert d.shape == (500, 3)
    assert np.allclose(np.linalg.norm(d, axis=1), 1.0)
    assert np.allclose(d[:3], np.eye(3))
    assert np.array_equal(d, cv.sphere_directions(3, 500))


def test_bump_ddbar_against_fd():
    sigma = 0.3
    r = np.linspace(0.01, 0.29, 50)
    h = 1e-5
    f = lambda s: cv.bump(sigma, s)
    # radial Laplacian f'' + f'/r, quartered
    lap = (f(r + h) - 2 * f(r) + f(r - h)) / h**2 + (f(r + h) - f(r - h)) / (2 * h * r)
    assert np.allclose(cv.bump_ddbar(sigma, r), lap / 4, atol=1e-4)


def test_slice_curvature_on_ball_like_slice():
    # along zhat through the origin the slice is the Poincare disc (curvature -2)
    params = dm.EggParams(2, 0.25)
    sl = cv.slice_curvature(params, [0, 1], 0.3)
    inner = sl.kappa[1:-1, 1:-1]
    assert np.allclose(inner, -2.0, atol=1e-3)


def test_currents_negativity():
    params = dm.EggParams(2, 0.25)
    for u in ([1, 0], [0, 1], [1, 1j]):
        rep = cv.currents_negativity_test(params, u, 0.1)
        assert rep["passes"]
        assert len(rep["bumps"]) == 3
    with pytest.raises(ValueError):
        cv.currents_negativity_test(params, [1, 0], 0.0)
    with pytest.raises(DomainError):
        cv.currents_negativity_test(params, [1, 0], 0.1, sigmas=(2.0,))
