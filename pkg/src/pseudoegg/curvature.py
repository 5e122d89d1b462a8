"""Curvature of Hermitian metrics, applied to the Wu metric of the pseudo-egg.

Curvature tensor (metric ``g_{i jbar}``, inverse ``g^{a bbar}``)::

    R_{i jbar k lbar} = -d_k dbar_l g_{i jbar}
                        + sum_{a,b} g^{a bbar} (d_k g_{i bbar}) (dbar_l g_{a jbar})

and the holomorphic sectional curvature along ``xi`` is

    sum R_{i jbar k lbar} xi_i conj(xi_j) xi_k conj(xi_l)
    / sum g_{i jbar} g_{k lbar} xi_i conj(xi_j) xi_k conj(xi_l).

With these conventions the Poincaré disc ``1/(1-|z|^2)^2`` has constant
curvature -2, and so does the ball metric returned by
:func:`comparison_metric_ball`.
"""

import math
from dataclasses import dataclass

import numpy as np

from .derivatives import first_derivatives, mixed_second
from .domain import DomainPoint, as_vector, defining_function, minkowski_functional, require_inside
from .exceptions import DomainError, InfeasibleError
from .wu import HermitianForm, wu_axis, wu_matrix

BASE_STEP = 3e-3
HSC_BOUND = -0.5


@dataclass
class CurvatureTensor:
    components: np.ndarray
    base: DomainPoint = None
    metric: np.ndarray = None

    def hermitian_residual(self):
        """``max |R_{i jbar k lbar} - conj(R_{j ibar l kbar})|``."""
        r = self.components
        return float(np.max(np.abs(r - np.conj(r.transpose(1, 0, 3, 2)))))


def curvature_tensor(metric, z, h):
    """Curvature tensor of a batched metric callable at ``z`` using step ``h``."""
    z = np.asarray(z, dtype=complex)
    n = z.shape[0]
    g = metric(z[None, :])[0]
    dz, dzb = first_derivatives(metric, z, h)
    dd = mixed_second(metric, z, h)
    if np.linalg.cond(g) > 1e13:
        raise InfeasibleError("metric matrix is numerically singular")
    # X[a, j, l] = sum_b g^{b abar}... solved directly: G^{-1} dbar_l G
    rhs = dzb.reshape(n, n * n)
    x = np.linalg.solve(g, rhs).reshape(n, n, n)
    second = np.einsum("ibk,bjl->ijkl", dz, x)
    return -dd + second, g


def _wu_step(params, z, base_step):
    # per-coordinate steps: z_1 varies on the scale |z_1| (the metric involves
    # |z_1|^{2m}); every coordinate also feels the distance to the boundary
    gap = min(1.0, 1.0 - float(defining_function(params, z)))
    steps = np.full(params.n, base_step * gap)
    steps[0] = base_step * min(gap, abs(z[0]))
    return steps


def curvature_tensor_fd(params, z, base_step=BASE_STEP):
    z = require_inside(params, z)
    if z[0] == 0:
        raise DomainError("the Wu metric is not smooth on Z (z_1 = 0)")
    h = _wu_step(params, z, base_step)
    comps, g = curvature_tensor(lambda pts: wu_matrix(params.m, pts), z, h)
    return CurvatureTensor(comps, DomainPoint(z), g)


def curvature_axis_closed_form(params, p):
    """Curvature of the Wu metric at ``(p, 0)`` from the closed-form list."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p!r}")
    n, m = params.n, params.m
    P = p ** (2 * m)
    q = 1.0 - p * p
    r = np.zeros((n,) * 4, dtype=complex)
    r[0, 0, 0, 0] = -2.0 / q**4
    for j in range(1, n):
        r[0, 0, j, j] = -(1 + p * p) / (m * q**3) + p * p * (1 - P) / (m * m * q**4)
        r[0, j, j, 0] = r[j, 0, 0, j] = -(1 + p * p) / (m * q**3) + P / (q**2 * (1 - P))
        r[j, j, 0, 0] = -m * m * p ** (2 * m - 2) / (1 - P) ** 3
        r[j, j, j, j] = -p * p / (m * m * q**2) - 1 / (1 - P) - 1 / (1 - P) ** 2
        for i in range(1, n):
            if i != j:
                r[i, i, j, j] = -1 / (1 - P) ** 2
                r[i, j, j, i] = -p * p / (m * m * q**2) - 1 / (1 - P)
    base = np.zeros(n, dtype=complex)
    base[0] = p
    return CurvatureTensor(r, DomainPoint(base), wu_axis(params, p).entries)


def closed_form_support(n):
    """Index tuples ``(i, j, k, l)`` that the closed-form list populates."""
    out = {(0, 0, 0, 0)}
    for j in range(1, n):
        out |= {(0, 0, j, j), (0, j, j, 0), (j, 0, 0, j), (j, j, 0, 0), (j, j, j, j)}
        for i in range(1, n):
            if i != j:
                out |= {(i, i, j, j), (i, j, j, i)}
    return sorted(out)


def sectional(g, r, xi):
    """Holomorphic sectional curvature of tensor ``r`` w.r.t. metric ``g``."""
    xi = np.asarray(xi, dtype=complex)
    xc = np.conj(xi)
    num = np.einsum("ijkl,i,j,k,l->", r, xi, xc, xi, xc)
    quad = xi @ g @ xc
    return float(num.real / (quad * quad).real)


def _is_axis_point(z):
    return np.all(z[1:] == 0) and z[0].imag == 0 and z[0].real > 0


def hsc(params, z, xi, method="auto"):
    """Holomorphic sectional curvature of the Wu metric at ``z`` along ``xi``.

    ``method`` is ``"fd"`` (finite differences of the closed-form metric),
    ``"closed"`` (axis points only) or ``"auto"`` (closed form on the axis).
    """
    z = as_vector(params, z)
    xi = as_vector(params, xi)
    if not np.any(xi):
        raise DomainError("direction must be nonzero")
    if method == "closed" or (method == "auto" and _is_axis_point(z)):
        if not _is_axis_point(z):
            raise DomainError("closed-form curvature is only available at (p, 0)")
        t = curvature_axis_closed_form(params, float(z[0].real))
    else:
        t = curvature_tensor_fd(params, z)
    return sectional(t.metric, t.components, xi)


def _kronecker_points(count, dim):
    # additive recurrence with the generalized golden ratio of dimension `dim`
    phi = 2.0
    for _ in range(64):
        phi = (1.0 + phi) ** (1.0 / (dim + 1))
    alpha = (1.0 / phi) ** np.arange(1, dim + 1)
    k = np.arange(1, count + 1)[:, None]
    return np.mod(0.5 + k * alpha, 1.0)


def sphere_directions(n, count):
    """Deterministic, well-spread unit vectors in ``C^n``.

    Squared moduli are spacings of sorted low-discrepancy coordinates (uniform
    on the simplex, as for Haar-random unit vectors) and phases come from the
    remaining coordinates. The coordinate axes are always included.
    """
    dirs = [np.eye(n, dtype=complex)[i] for i in range(n)]
    extra = count - n
    if extra > 0:
        u = _kronecker_points(extra, 2 * n - 1)
        cuts = np.sort(u[:, : n - 1], axis=1)
        weights = np.diff(np.concatenate([np.zeros((extra, 1)), cuts, np.ones((extra, 1))], axis=1), axis=1)
        phases = np.exp(2j * np.pi * u[:, n - 1:])
        dirs.extend(np.sqrt(weights) * phases)
    return np.array(dirs[:count])


def hsc_bound_scan(params, p_grid, direction_count, method="closed"):
    """Scan the holomorphic sectional curvature over axis points and directions.

    Every smooth point is an automorphic image of an axis point, so the axis
    scan covers the smooth locus. Violations are reported, not raised.
    """
    dirs = sphere_directions(params.n, direction_count)
    best = (-math.inf, None, None)
    lowest = math.inf
    for p in p_grid:
        z = np.zeros(params.n, dtype=complex)
        z[0] = p
        if method == "closed":
            t = curvature_axis_closed_form(params, p)
        else:
            t = curvature_tensor_fd(params, z)
        for k, xi in enumerate(dirs):
            val = sectional(t.metric, t.components, xi)
            if val > best[0]:
                best = (val, float(p), k)
            lowest = min(lowest, val)
    return {
        "max_hsc": best[0],
        "argmax": {"p": best[1], "direction": best[2],
                   "xi": None if best[2] is None else dirs[best[2]].tolist()},
        "min_hsc": lowest,
        "bound": HSC_BOUND,
        "passes": bool(best[0] <= HSC_BOUND + 1e-6),
    }


def ball_matrix(z):
    """Poincaré-Bergman coefficients ``((1-|z|^2) delta + conj(z_i) z_j)/(1-|z|^2)^2``."""
    z = np.asarray(z, dtype=complex)
    n = z.shape[-1]
    s = 1.0 - np.sum((z * np.conj(z)).real, axis=-1)
    outer = np.conj(z)[..., :, None] * z[..., None, :]
    return (s[..., None, None] * np.eye(n) + outer) / (s**2)[..., None, None]


def comparison_metric_ball(params, z):
    z = as_vector(params, z)
    if np.vdot(z, z).real >= 1.0:
        raise DomainError("point is outside the unit ball")
    return HermitianForm(ball_matrix(z), DomainPoint(z))


def ball_tensor(params, z, h=BASE_STEP):
    """Finite-difference curvature tensor of the ball comparison metric."""
    z = as_vector(params, z)
    gap = 1.0 - float(np.vdot(z, z).real)
    comps, g = curvature_tensor(ball_matrix, z, h * min(1.0, gap))
    return CurvatureTensor(comps, DomainPoint(z), g)


def comparison_check(params, sample_count, rng, on_Z_fraction=0.2):
    """Check that ``sqrt(n) h - g`` is positive semidefinite on random points.

    ``h`` is the Wu metric and ``g`` the pulled-back ball metric; the two
    forms must agree at the origin.
    """
    from .domain import sample_points

    if sample_count < 100:
        raise ValueError("comparison_check needs at least 100 samples")
    pts = sample_points(params, sample_count, rng, on_Z_fraction=on_Z_fraction)
    diff = math.sqrt(params.n) * wu_matrix(params.m, pts) - ball_matrix(pts)
    eig = np.linalg.eigvalsh(diff)[:, 0]
    origin = np.zeros(params.n, dtype=complex)
    origin_gap = float(np.max(np.abs(wu_matrix(params.m, origin) - ball_matrix(origin))))
    worst = int(np.argmin(eig))
    return {
        "min_eigenvalue": float(eig[worst]),
        "argmin": pts[worst].tolist(),
        "samples": int(sample_count),
        "on_Z_samples": int(np.sum(pts[:, 0] == 0)),
        "origin_difference": origin_gap,
        "passes": bool(eig[worst] >= -1e-9 and origin_gap <= 1e-12),
    }


@dataclass
class SliceMetric:
    direction: np.ndarray
    coords: np.ndarray
    h0: np.ndarray
    kappa: np.ndarray
    step: float


def slice_density(params, u, zeta):
    """``h0(zeta)``: the Wu metric restricted to the line ``zeta -> zeta u``."""
    u = np.asarray(u, dtype=complex)
    zeta = np.asarray(zeta, dtype=complex)
    pts = zeta[..., None] * u
    hh = wu_matrix(params.m, pts)
    return np.einsum("...ij,i,j->...", hh, u, np.conj(u)).real


def slice_radius(params, u):
    """Radius of the largest disc ``{zeta u}`` inside the domain."""
    return 1.0 / minkowski_functional(params, u)


def slice_curvature(params, u, half_width, points=65):
    """Gaussian curvature ``-(d dbar log h0)/h0`` of the slice metric on a square grid.

    The Laplacian uses the five-point stencil; curvature is only reported on
    interior nodes and is ``nan`` where the slice crosses ``Z`` through a
    point at which the metric is not smooth (``zeta = 0`` when ``u_1 != 0``).
    """
    u = as_vector(params, u)
    u = u / np.linalg.norm(u)
    rho = slice_radius(params, u)
    if half_width * math.sqrt(2.0) >= rho:
        raise DomainError("slice grid leaves the domain")
    axis = np.linspace(-half_width, half_width, points)
    step = axis[1] - axis[0]
    zeta = axis[None, :] + 1j * axis[:, None]
    h0 = slice_density(params, u, zeta)
    if np.any(h0 <= 0):
        raise InfeasibleError("restricted metric is not positive")
    lg = np.log(h0)
    lap = np.full_like(lg, np.nan)
    lap[1:-1, 1:-1] = (lg[2:, 1:-1] + lg[:-2, 1:-1] + lg[1:-1, 2:] + lg[1:-1, :-2]
                       - 4.0 * lg[1:-1, 1:-1]) / step**2
    kappa = -(lap / 4.0) / h0
    if u[0] != 0:
        kappa[zeta == 0] = np.nan
    return SliceMetric(u, zeta, h0, kappa, step)


def bump(sigma, r):
    """``exp(-1/(1 - (r/sigma)^2))`` inside ``r < sigma``, zero outside."""
    s = (np.asarray(r) / sigma) ** 2
    out = np.zeros_like(s)
    inside = s < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - s[inside]))
    return out


def bump_ddbar(sigma, r):
    """``d dbar`` of :func:`bump` (a quarter of its Laplacian), in closed form."""
    s = (np.asarray(r) / sigma) ** 2
    out = np.zeros_like(s)
    inside = s < 1.0
    si = s[inside]
    g1 = -1.0 / (1.0 - si) ** 2
    g2 = -2.0 / (1.0 - si) ** 3
    f = np.exp(-1.0 / (1.0 - si))
    out[inside] = (si * (g2 + g1 * g1) * f + g1 * f) / sigma**2
    return out


def _bump_integrals(params, u, c, sigma, radial, angular):
    dr = sigma / radial
    dt = 2.0 * np.pi / angular
    r = (np.arange(radial) + 0.5) * dr
    t = (np.arange(angular) + 0.5) * dt
    zeta = r[:, None] * np.exp(1j * t[None, :])
    h0 = slice_density(params, u, zeta)
    area = (r * dr * dt)[:, None]
    lhs = float(np.sum(np.log(h0) * bump_ddbar(sigma, r)[:, None] * area))
    rhs = float(c * np.sum(h0 * bump(sigma, r)[:, None] * area))
    return lhs, rhs


def currents_negativity_test(params, u, c, sigmas=(0.1, 0.2, 0.3), radial=256, angular=128,
                             resolution_tol=0.01):
    """Distributional curvature bound on the disc ``{zeta u}`` through the origin.

    Tests ``integral log h0 * d dbar phi >= c * integral h0 * phi`` for each
    bump ``phi`` of width ``sigma``; this is ``d dbar log h0 >= c h0`` in the
    sense of distributions, i.e. curvature at most ``-c``. Each integral is
    recomputed on a grid of twice the resolution and must move by less than
    ``resolution_tol`` relative.
    """
    u = as_vector(params, u)
    u = u / np.linalg.norm(u)
    if c <= 0:
        raise ValueError("c must be positive")
    rho = slice_radius(params, u)
    bumps = []
    for sigma in sigmas:
        if sigma >= rho:
            raise DomainError(f"bump of width {sigma} leaves the domain (disc radius {rho:.6g})")
        lhs, rhs = _bump_integrals(params, u, c, sigma, radial, angular)
        lhs2, rhs2 = _bump_integrals(params, u, c, sigma, 2 * radial, 2 * angular)
        drift = max(abs(lhs2 - lhs) / abs(lhs2), abs(rhs2 - rhs) / abs(rhs2))
        if drift >= resolution_tol:
            raise InfeasibleError(f"quadrature not resolved for sigma={sigma}: drift {drift:.3g}")
        bumps.append({"sigma": float(sigma), "lhs": lhs2, "rhs": rhs2,
                      "margin": (lhs2 - rhs2) / abs(rhs2), "drift": drift})
    margin = min(b["margin"] for b in bumps)
    return {"passes": bool(margin > 0), "margin": margin, "c": float(c),
            "direction": u.tolist(), "bumps": bumps}
