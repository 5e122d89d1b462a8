"""The pseudo-egg domain, its gauge, and its automorphisms.

The domain is ``{z in C^n : |z_1|^{2m} + |z_2|^2 + ... + |z_n|^2 < 1}`` with
``0 < m < 1/2``. Points are plain complex numpy vectors of length ``n``;
functions that accept batches treat the last axis as the coordinate axis.

Fractional powers of ``1 - <zhat, phat>`` use the principal branch of the
logarithm. For ``zhat`` and ``phat`` in the unit ball that quantity has
positive real part, so the branch cut is never approached.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError
from .roots import bisect

# numerical guards against catastrophic cancellation near the boundary
HAT_NORM_GUARD = 1e-14
AXIS_GUARD = 1e-10


@dataclass(frozen=True)
class EggParams:
    n: int
    m: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"dimension n must be an integer >= 2, got {self.n!r}")
        if not 0.0 < self.m < 0.5:
            raise DomainError(f"exponent m must lie in (0, 1/2), got {self.m!r}")

    @property
    def w_max(self):
        """Upper end ``1/(4m(1-m))`` of the mixed Kobayashi regime."""
        return 1.0 / (4.0 * self.m * (1.0 - self.m))


@dataclass(frozen=True)
class DomainPoint:
    z: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "z", np.asarray(self.z, dtype=complex))

    @property
    def on_Z(self):
        return self.z[0] == 0

    @property
    def zhat(self):
        return self.z[1:]


def as_vector(params, z):
    z = np.asarray(z, dtype=complex)
    if z.shape[-1] != params.n:
        raise DomainError(f"expected {params.n} coordinates, got {z.shape[-1]}")
    return z


def defining_function(params, z):
    """``|z_1|^{2m} + |zhat|^2``; the domain is where this is below one."""
    z = np.asarray(z, dtype=complex)
    a1 = (z[..., 0] * np.conj(z[..., 0])).real
    return a1 ** params.m + np.sum((z[..., 1:] * np.conj(z[..., 1:])).real, axis=-1)


def contains(params, z):
    return bool(defining_function(params, as_vector(params, z)) < 1.0)


def require_inside(params, z):
    z = as_vector(params, z)
    if not contains(params, z):
        raise DomainError(f"point {z.tolist()} is not in the domain")
    if np.vdot(z[1:], z[1:]).real > 1.0 - HAT_NORM_GUARD:
        raise DomainError("|zhat|^2 too close to 1")
    return z


def minkowski_functional(params, v, rtol=1e-13):
    """Gauge ``q(v) = inf{s > 0 : v/s in E}``; also the Kobayashi metric at 0.

    Solved by bisection on ``s -> |v_1|^{2m} s^{-2m} + |vhat|^2 s^{-2} - 1``,
    which is strictly decreasing. ``q(v) >= |v|`` because the domain sits
    inside the unit ball, which gives the lower end of the bracket.
    """
    v = as_vector(params, v)
    m = params.m
    a1 = abs(v[0])
    b2 = float(np.vdot(v[1:], v[1:]).real)
    if a1 == 0.0:
        return float(np.sqrt(b2))
    if b2 == 0.0:
        return float(a1)
    a2m = a1 ** (2 * m)

    def g(s):
        return a2m * s ** (-2 * m) + b2 / (s * s) - 1.0

    norm = float(np.sqrt(a1 * a1 + b2))
    lo = norm
    hi = norm * max(1.0, norm ** (1.0 / m - 1.0)) + 1.0
    if g(lo) <= 0.0:
        # only reachable through rounding when one part of v is negligible
        return lo
    while g(hi) > 0.0:
        hi *= 2.0
    return bisect(g, lo, hi, xtol=0.0, rtol=rtol)


def random_unitary(k, rng):
    """Haar-distributed ``k x k`` unitary matrix."""
    a = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
    q, r = np.linalg.qr(a)
    d = np.diag(r)
    return q * (d / np.abs(d))


def sample_points(params, count, rng, on_Z_fraction=0.0, shrink=0.98):
    """Draw ``count`` points of the domain.

    ``zhat`` is uniform in the ball of radius ``sqrt(shrink)`` and ``z_1`` is
    uniform in the admissible disc of radius ``(shrink - |zhat|^2)^{1/2m}``,
    so every sample keeps a margin from the boundary. A fraction of the
    samples is placed on ``Z`` (``z_1 = 0``).
    """
    n, m = params.n, params.m
    g = rng.normal(size=(count, n - 1)) + 1j * rng.normal(size=(count, n - 1))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    rad = np.sqrt(shrink) * rng.uniform(size=count) ** (1.0 / (2 * (n - 1)))
    zhat = g * rad[:, None]
    room = shrink - np.sum(np.abs(zhat) ** 2, axis=1)
    r1 = room ** (1.0 / (2 * m)) * np.sqrt(rng.uniform(size=count))
    z1 = r1 * np.exp(2j * np.pi * rng.uniform(size=count))
    on_z = rng.uniform(size=count) < on_Z_fraction
    z1[on_z] = 0.0
    return np.concatenate([z1[:, None], zhat], axis=1)


def _projector_form(a):
    """Return ``A = P_a + sqrt(1-|a|^2) Q_a`` for the ball Möbius map."""
    k = a.shape[0]
    aa = float(np.vdot(a, a).real)
    s = np.sqrt(1.0 - aa)
    if aa == 0.0:
        return np.eye(k, dtype=complex)
    proj = np.outer(a, np.conj(a)) / aa
    return proj + s * (np.eye(k) - proj)


@dataclass(frozen=True)
class BallAutomorphism:
    """``Psi(x) = U (A x - a) / (1 - <x, a>)``, an automorphism of the unit ball.

    Maps ``center`` (``a``) to the origin. ``<x, a> = sum x_j conj(a_j)``.
    With ``center = 0`` and ``U = I`` this is the identity.
    """

    center: np.ndarray
    unitary: np.ndarray = None
    _A: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        a = np.asarray(self.center, dtype=complex)
        object.__setattr__(self, "center", a)
        if float(np.vdot(a, a).real) >= 1.0:
            raise DomainError("ball automorphism center must lie in the open unit ball")
        u = np.eye(a.shape[0], dtype=complex) if self.unitary is None else np.asarray(self.unitary, dtype=complex)
        object.__setattr__(self, "unitary", u)
        object.__setattr__(self, "_A", _projector_form(a))

    def __call__(self, x):
        x = np.asarray(x, dtype=complex)
        a = self.center
        den = 1.0 - x @ np.conj(a)
        num = x @ self._A.T - a
        return (num / den[..., None]) @ self.unitary.T

    def inverse(self):
        # M_a^{-1} = M_{-a} and M_{-a}(U^H w) = U^H M_{-Ua}(w)
        uh = np.conj(self.unitary.T)
        return BallAutomorphism(-(self.unitary @ self.center), uh)

    def jacobian(self, x):
        x = np.asarray(x, dtype=complex)
        a = self.center
        den = 1.0 - np.vdot(a, x)
        num = self._A @ x - a
        d = self._A / den + np.outer(num, np.conj(a)) / den**2
        return self.unitary @ d


class EggAutomorphism:
    """Automorphism ``Phi(z) = (c z_1 (1 - <zhat, a>)^{-1/m}, Psi(zhat))``.

    ``c = phase * (1 - |a|^2)^{1/2m}`` where ``a`` is the centre of the ball
    automorphism ``Psi``. When built from a base point ``b`` with ``b_1 != 0``
    the phase is ``|b_1|/b_1`` and ``Phi(b)`` lies on the positive real
    ``z_1``-axis.
    """

    def __init__(self, params, psi, phase=1.0 + 0j, base_point=None):
        self.params = params
        self.psi = psi
        self.phase = complex(phase)
        if not np.isclose(abs(self.phase), 1.0, rtol=0, atol=1e-13):
            raise DomainError("phase must be unimodular")
        a = psi.center
        self.scale = self.phase * (1.0 - float(np.vdot(a, a).real)) ** (1.0 / (2 * params.m))
        self.base_point = None if base_point is None else np.asarray(base_point, dtype=complex)

    @property
    def center(self):
        return self.psi.center

    def _factor(self, zhat, power):
        # principal branch; Re(1 - <zhat, a>) > 0 inside the ball
        e = 1.0 - zhat @ np.conj(self.center)
        return np.exp(power * np.log(e))

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        zhat = z[..., 1:]
        first = self.scale * z[..., 0] * self._factor(zhat, -1.0 / self.params.m)
        return np.concatenate([first[..., None], self.psi(zhat)], axis=-1)

    def inverse(self):
        """The inverse map, itself a member of the same family."""
        return EggAutomorphism(self.params, self.psi.inverse(), np.conj(self.phase))

    def jacobian(self, z):
        """Holomorphic Jacobian ``d Phi_z`` as an ``n x n`` complex matrix."""
        z = np.asarray(z, dtype=complex)
        m = self.params.m
        zhat = z[1:]
        e = 1.0 - np.vdot(self.center, zhat)
        jac = np.zeros((self.params.n, self.params.n), dtype=complex)
        jac[0, 0] = self.scale * np.exp((-1.0 / m) * np.log(e))
        jac[0, 1:] = self.scale * z[0] * (1.0 / m) * np.exp((-1.0 / m - 1.0) * np.log(e)) * np.conj(self.center)
        jac[1:, 1:] = self.psi.jacobian(zhat)
        return jac

    def __repr__(self):
        return f"EggAutomorphism(center={self.center!r}, phase={self.phase!r})"


def axis_coordinate(params, p):
    """``|p_1| / (1 - |phat|^2)^{1/2m}``: where normalization sends ``p``."""
    p = np.asarray(p, dtype=complex)
    hat2 = float(np.vdot(p[1:], p[1:]).real)
    return abs(p[0]) / (1.0 - hat2) ** (1.0 / (2 * params.m))


def normalizing_automorphism(params, p, unitary=None):
    """Automorphism sending ``p`` (with ``p_1 != 0``) to an axis point ``(q, 0)``."""
    p = require_inside(params, p)
    if p[0] == 0:
        raise DomainError("p_1 = 0: the point lies on Z; use normalize_point")
    psi = BallAutomorphism(p[1:], unitary)
    return EggAutomorphism(params, psi, abs(p[0]) / p[0], base_point=p)


def normalize_point(params, z, unitary=None):
    """Return ``(phi, q)`` with ``phi(z) = (q, 0, ..., 0)`` and ``0 <= q < 1``.

    Points of ``Z`` are moved to the origin by an automorphism that acts as a
    ball automorphism in ``zhat`` (phase one); other points use the family
    above.
    """
    z = require_inside(params, z)
    if z[0] == 0:
        phi = EggAutomorphism(params, BallAutomorphism(z[1:], unitary), 1.0, base_point=z)
        return phi, 0.0
    phi = normalizing_automorphism(params, z, unitary)
    q = axis_coordinate(params, z)
    if q >= 1.0 - AXIS_GUARD:
        raise DomainError("normalized axis coordinate too close to 1")
    return phi, q


def apply_automorphism(phi, z):
    return phi(z)


def automorphism_jacobian(phi, z):
    return phi.jacobian(z)
