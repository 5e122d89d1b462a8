import math

import mpmath
import numpy as np
import pytest

from pseudoegg import domain as dm
from pseudoegg import kobayashi as kb
from pseudoegg import wu
from pseudoegg.exceptions import DomainError, InfeasibleError

P_VALUES = (0.1, 0.3, 0.5, 0.7, 0.9)


def _mp_wu(m, z):
    """The closed-form coefficients in extended precision (n = 2)."""
    z1, z2 = z
    a1 = abs(z1) ** 2
    s = 1 - abs(z2) ** 2
    S = s ** (1 / m)
    den = (S - a1) ** 2
    h11 = S / den
    h12 = s ** (1 / m - 1) / (m * den) * mpmath.conj(z1) * z2
    h22 = (s ** (1 / m - 2) * a1 / (m * m * den) + 1 / (s * (s - a1 ** m))) * abs(z2) ** 2 \
        + 1 / (s - a1 ** m)
    return [[h11, h12], [mpmath.conj(h12), h22]]


def test_origin_is_identity(params):
    h = wu.wu_general(params, np.zeros(params.n))
    assert np.allclose(h.entries, np.eye(params.n), atol=0)


def test_axis_diagonal(params):
    for p in P_VALUES:
        h = wu.wu_axis(params, p).entries
        assert h[0, 0] == pytest.approx((1 - p * p) ** -2, rel=1e-15)
        for j in range(1, params.n):
            assert h[j, j] == pytest.approx(1 / (1 - p ** (2 * params.m)), rel=1e-15)
        assert np.count_nonzero(h - np.diag(np.diag(h))) == 0


def test_matrix_against_extended_precision():
    mpmath.mp.dps = 30
    m = 0.3
    z = np.array([0.2 - 0.15j, 0.3 + 0.4j])
    ref = _mp_wu(mpmath.mpf(m), [mpmath.mpc(c.real, c.imag) for c in z])
    h = wu.wu_matrix(m, z)
    for i in range(2):
        for j in range(2):
            assert complex(ref[i][j]) == pytest.approx(h[i, j], rel=1e-13)


def test_hermitian_and_positive(params, rng):
    pts = dm.sample_points(params, 300, rng, on_Z_fraction=0.2)
    hh = wu.wu_matrix(params.m, pts)
    assert np.max(np.abs(hh - np.conj(np.swapaxes(hh, -1, -2)))) == 0.0
    assert np.all(np.linalg.eigvalsh(hh)[:, 0] > 0)


def test_pullback_invariance(params, rng):
    for _ in range(20):
        z = dm.sample_points(params, 1, rng, shrink=0.9)[0]
        phi = dm.normalizing_automorphism(params, dm.sample_points(params, 1, rng, shrink=0.9)[0])
        if dm.defining_function(params, phi(z)) > 0.95:
            continue
        h = wu.wu_general(params, z).entries
        back = wu.pullback(wu.wu_general(params, phi(z)).entries, phi.jacobian(z))
        assert np.max(np.abs(back - h)) <= 1e-9 * np.max(np.abs(h))


def test_length_squared_convention():
    params = dm.EggParams(2, 0.25)
    h = wu.wu_general(params, [0.3 + 0.1j, 0.2 - 0.3j])
    v = np.array([0.4 - 0.2j, 1.0 + 0.5j])
    assert h.length_squared(v) == pytest.approx((v @ h.entries @ np.conj(v)).real)
    assert h.length_squared(v) > 0


def test_fit_matches_closed_form(params):
    for p in (0.1, 0.5, 0.9):
        fit = wu.fit_min_volume_ellipsoid(params, p, 1024)
        assert fit.r1 == pytest.approx((1 - p * p) ** -2, rel=1e-9)
        assert fit.r2 == pytest.approx(1 / (1 - p ** (2 * params.m)), rel=1e-9)
        assert fit.max_violation <= 1e-9


def test_grid_fit_agrees_loosely():
    params = dm.EggParams(2, 0.25)
    reduced = wu.fit_min_volume_ellipsoid(params, 0.5, 1024)
    grid = wu.fit_min_volume_ellipsoid(params, 0.5, 1024, method="grid")
    # a 256-point grid resolves each coefficient to about 1%
    assert grid.r1 == pytest.approx(reduced.r1, rel=2e-2)
    assert grid.r2 == pytest.approx(reduced.r2, rel=2e-2)
    assert grid.objective >= reduced.objective - 1e-12


def test_fit_volume_is_minimal_among_perturbations():
    params = dm.EggParams(3, 0.25)
    p = 0.5
    fit = wu.fit_min_volume_ellipsoid(params, p, 1024)
    samples = kb.indicatrix_boundary(params, p, 1024)
    x = np.array([s.x for s in samples])
    y = np.array([s.y for s in samples])
    for r1 in fit.r1 * np.array([0.9, 0.99, 0.999]):
        r2 = np.min((1 - r1 * y[x > 0]) / x[x > 0])
        assert r1 * r2 ** 2 <= fit.r1 * fit.r2 ** 2 * (1 + 1e-12)


def test_fit_rejects_small_counts():
    with pytest.raises(InfeasibleError):
        wu.fit_min_volume_ellipsoid(dm.EggParams(2, 0.25), 0.5, 8)


def test_kahler_defect_fd(params):
    for z1 in (0.2, 0.5j, -0.8):
        d = wu.kahler_defect(params, z1)
        assert abs(d) > 1e-3
        assert wu.kahler_defect_fd(params, z1) == pytest.approx(d, rel=1e-6)
    with pytest.raises(DomainError):
        wu.kahler_defect(params, 0.0)


def test_kahler_defect_extended_precision():
    mpmath.mp.dps = 30
    m = mpmath.mpf("0.25")
    z1 = mpmath.mpc("0.4", "0.1")
    # d h12/d z2 and d h22/d z1 along real directions, via Wirtinger combinations
    def h(i, j, x1, y1, x2, y2):
        return _mp_wu(m, [mpmath.mpc(x1, y1), mpmath.mpc(x2, y2)])[i][j]
    at = (z1.real, z1.imag, 0, 0)
    d12 = (mpmath.diff(lambda a: h(0, 1, at[0], at[1], a, 0), 0)
           - 1j * mpmath.diff(lambda b: h(0, 1, at[0], at[1], 0, b), 0)) / 2
    d22 = (mpmath.diff(lambda a: h(1, 1, a, at[1], 0, 0), at[0])
           - 1j * mpmath.diff(lambda b: h(1, 1, at[0], b, 0, 0), at[1])) / 2
    ref = complex(d12 - d22)
    got = wu.kahler_defect(dm.EggParams(2, 0.25), complex(z1))
    assert got == pytest.approx(ref, rel=1e-12)


def test_continuity_probe_shape_and_modulus():
    params = dm.EggParams(2, 0.25)
    rep = wu.continuity_probe_Z(params, np.zeros(1), [1e-5, 1e-6, 1e-7, 1e-8])
    assert rep["decreasing"]
    # distances scale like r^{2m}
    assert rep["modulus_exponent"] == pytest.approx(0.5, abs=0.02)


def test_general_rejects_outside():
    with pytest.raises(DomainError):
        wu.wu_general(dm.EggParams(2, 0.25), [0.99, 0.5])
