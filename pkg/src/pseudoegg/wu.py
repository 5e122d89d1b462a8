"""The Wu metric of the pseudo-egg.

Forms are stored as matrices ``H[i, j] = h_{i jbar}``; the length of a tangent
vector ``v`` is ``sum_ij h_{i jbar} v_i conj(v_j)``. Pulling back along a
holomorphic map with Jacobian ``J`` gives ``J^T H conj(J)``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .derivatives import first_derivatives
from .domain import DomainPoint, require_inside
from .exceptions import DomainError, InfeasibleError
from .kobayashi import indicatrix_boundary

CONTAINMENT_TOL = 1e-9
ACTIVITY_TOL = 1e-6
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class HermitianForm:
    entries: np.ndarray
    base: DomainPoint = None

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=complex)

    def length_squared(self, v):
        v = np.asarray(v, dtype=complex)
        return float((v @ self.entries @ np.conj(v)).real)

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.entries)

    def is_positive_definite(self):
        return bool(self.eigenvalues()[0] > 0.0)

    def hermitian_residual(self):
        return float(np.max(np.abs(self.entries - np.conj(self.entries.T))))


@dataclass
class EllipsoidFit:
    r1: float
    r2: float
    objective: float
    max_violation: float
    samples_used: int


def wu_matrix(m, z):
    """Closed-form Wu metric coefficients at a batch of points ``z`` of shape ``(..., n)``."""
    z = np.asarray(z, dtype=complex)
    z1 = z[..., 0]
    zh = z[..., 1:]
    n = z.shape[-1]
    a1 = (z1 * np.conj(z1)).real
    s = 1.0 - np.sum((zh * np.conj(zh)).real, axis=-1)
    big_s = s ** (1.0 / m)
    den = (big_s - a1) ** 2
    gap = s - a1**m

    out = np.empty(z.shape[:-1] + (n, n), dtype=complex)
    out[..., 0, 0] = big_s / den
    row = (s ** (1.0 / m - 1.0) / (m * den))[..., None] * np.conj(z1)[..., None] * zh
    out[..., 0, 1:] = row
    out[..., 1:, 0] = np.conj(row)
    outer = np.conj(zh)[..., :, None] * zh[..., None, :]
    coef1 = s ** (1.0 / m - 2.0) * a1 / (m * m * den)
    coef2 = 1.0 / (s * gap)
    block = (coef1 + coef2)[..., None, None] * outer
    idx = np.arange(1, n)
    block[..., idx - 1, idx - 1] += (s * coef2)[..., None]
    out[..., 1:, 1:] = block
    # enforce exact Hermitian symmetry against rounding in the products
    return 0.5 * (out + np.conj(np.swapaxes(out, -1, -2)))


def wu_axis(params, p):
    p = float(p)
    if not 0.0 <= p < 1.0:
        raise DomainError(f"p must lie in [0, 1), got {p!r}")
    diag = np.full(params.n, 1.0 / (1.0 - p ** (2 * params.m)))
    diag[0] = 1.0 / (1.0 - p * p) ** 2
    base = np.zeros(params.n, dtype=complex)
    base[0] = p
    return HermitianForm(np.diag(diag).astype(complex), DomainPoint(base))


def wu_general(params, z):
    z = require_inside(params, z)
    return HermitianForm(wu_matrix(params.m, z), DomainPoint(z))


def pullback(entries, jac):
    """Coefficients of the pulled-back form ``J^T H conj(J)``."""
    return jac.T @ entries @ np.conj(jac)


def _r2_given_r1(r1, x, y):
    mask = x > 0.0
    return float(np.min((1.0 - r1 * y[mask]) / x[mask]))


def _golden_max(func, lo, hi, xtol):
    c = hi - GOLDEN * (hi - lo)
    d = lo + GOLDEN * (hi - lo)
    fc, fd = func(c), func(d)
    while hi - lo > xtol:
        if fc < fd:
            lo, c, fc = c, d, fd
            d = lo + GOLDEN * (hi - lo)
            fd = func(d)
        else:
            hi, d, fd = d, c, fc
            c = hi - GOLDEN * (hi - lo)
            fc = func(c)
    return lo, hi


def _fit_reduced(n, x, y):
    y_max = float(y.max())
    hi = 1.0 / y_max

    def objective(r1):
        r2 = _r2_given_r1(r1, x, y)
        if r2 <= 0.0:
            return -math.inf
        return math.log(r1) + (n - 1) * math.log(r2)

    # r2(r1) is a minimum of affine functions, so the log objective is concave
    lo, hi_found = _golden_max(objective, 1e-9 * hi, hi, 1e-14 * hi)
    candidates = [lo, hi_found, hi]
    r1 = max(candidates, key=objective)
    return r1, _r2_given_r1(r1, x, y)


def _fit_grid(n, x, y, size=256):
    y_max = float(y.max())
    r1_grid = np.linspace(1.0 / size, 1.0, size) / y_max
    r2_top = float(np.min(1.0 / x[x > 0]))
    r2_grid = np.linspace(1.0 / size, 1.0, size) * r2_top * 1.2
    best = (-math.inf, None, None)
    for r1 in r1_grid:
        worst = np.max(r1 * y[None, :] + r2_grid[:, None] * x[None, :], axis=1)
        ok = np.nonzero(worst <= 1.0 + CONTAINMENT_TOL)[0]
        if ok.size == 0:
            continue
        r2 = r2_grid[ok[-1]]
        val = math.log(r1) + (n - 1) * math.log(r2)
        if val > best[0]:
            best = (val, r1, r2)
    if best[1] is None:
        raise InfeasibleError("grid search found no enclosing ellipsoid")
    return best[1], best[2]


def fit_min_volume_ellipsoid(params, p, count, method="reduced"):
    """Smallest ellipsoid ``r1 |v_1|^2 + r2 |vhat|^2 <= 1`` containing the indicatrix.

    In square coordinates ``(x, y) = (|vhat|^2, |v_1|^2)`` containment is the
    linear condition ``r1 y + r2 x <= 1`` on the indicatrix boundary, and the
    volume is proportional to ``1/(r1 r2^(n-1))``. ``method="grid"`` runs a
    brute-force search over ``(r1, r2)`` instead of the one-dimensional
    reduction.
    """
    if count < 256:
        raise InfeasibleError(f"fit needs at least 256 boundary samples, got {count}")
    samples = indicatrix_boundary(params, p, count)
    x = np.array([s.x for s in samples])
    y = np.array([s.y for s in samples])
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))) or y.max() <= 0 or x.max() <= 0:
        raise InfeasibleError("corrupt indicatrix samples")
    if method == "reduced":
        r1, r2 = _fit_reduced(params.n, x, y)
    elif method == "grid":
        r1, r2 = _fit_grid(params.n, x, y)
    else:
        raise ValueError(f"unknown fit method {method!r}")
    if r1 <= 0.0 or r2 <= 0.0:
        raise InfeasibleError("no enclosing ellipsoid with positive coefficients")
    q = r1 * y + r2 * x
    violation = float(q.max() - 1.0)
    if violation > CONTAINMENT_TOL:
        raise InfeasibleError(f"containment violated by {violation:g}")
    if method == "reduced" and q.max() < 1.0 - ACTIVITY_TOL:
        raise InfeasibleError("fitted ellipsoid does not touch the indicatrix")
    return EllipsoidFit(r1=float(r1), r2=float(r2),
                        objective=-math.log(r1 * r2 ** (params.n - 1)),
                        max_violation=violation, samples_used=len(samples))


def kahler_defect(params, z1):
    """``d h_{1 2bar}/d z_2 - d h_{2 2bar}/d z_1`` at ``(z1, 0)``, in closed form."""
    z1 = complex(z1)
    r = abs(z1)
    if not 0.0 < r < 1.0:
        raise DomainError("kahler_defect needs 0 < |z1| < 1")
    m = params.m
    r2m = r ** (2 * m)
    return np.conj(z1) / (m * (1.0 - r * r) ** 2) - m * r2m / (z1 * (1.0 - r2m) ** 2)


def kahler_defect_fd(params, z1, h=1e-5):
    """Finite-difference counterpart of :func:`kahler_defect`."""
    z = np.zeros(params.n, dtype=complex)
    z[0] = z1

    def entries(pts):
        hh = wu_matrix(params.m, pts)
        return np.stack([hh[:, 0, 1], hh[:, 1, 1]], axis=-1)

    dz, _ = first_derivatives(entries, z, h)
    return complex(dz[0, 1] - dz[1, 0])


def continuity_probe_Z(params, zhat, radii, phases=64, threshold=1e-4):
    """Distance from the Wu form on ``Z`` to nearby forms off ``Z``.

    For each radius ``r`` reports the largest entrywise difference between
    ``h(r e^{i theta}, zhat)`` and ``h(0, zhat)`` over ``phases`` angles.
    """
    zhat = np.asarray(zhat, dtype=complex)
    base = np.concatenate([[0.0], zhat])
    require_inside(params, base)
    h0 = wu_matrix(params.m, base)
    theta = 2.0 * np.pi * np.arange(phases) / phases
    distances = []
    for r in radii:
        pts = np.tile(base, (phases, 1))
        pts[:, 0] = r * np.exp(1j * theta)
        diff = np.abs(wu_matrix(params.m, pts) - h0)
        distances.append(float(diff.max()))
    decreasing = all(b < a for a, b in zip(distances, distances[1:]))
    nonzero = [d for r, d in zip(radii, distances) if r > 0]
    return {
        "radii": [float(r) for r in radii],
        "distances": distances,
        "decreasing": decreasing,
        "final": distances[-1] if distances else None,
        "below_threshold": bool(distances and distances[-1] < threshold),
        "passes": bool(decreasing and distances and distances[-1] < threshold),
        "modulus_exponent": _fit_exponent(
            [r for r in radii if r > 0], nonzero),
    }


def _fit_exponent(radii, distances):
    # slope of log distance against log radius; the natural modulus is r^{2m}
    pairs = [(math.log(r), math.log(d)) for r, d in zip(radii, distances) if d > 0]
    if len(pairs) < 2:
        return None
    a = np.array(pairs)
    return float(np.polyfit(a[:, 0], a[:, 1], 1)[0])
