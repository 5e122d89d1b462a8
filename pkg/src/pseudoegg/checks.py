"""Verification checks over the standard parameter grid.

Each check returns a :class:`CheckResult` holding the worst measured value,
the tolerance it was held to, and whether it passed. ``run_suite`` groups
the checks the way the ``verify`` command exposes them.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import curvature as cv
from . import domain as dm
from . import kobayashi as kb
from . import wu

M_GRID = (0.1, 0.25, 0.4)
N_GRID = (2, 3)
P_GRID = (0.1, 0.3, 0.5, 0.7, 0.9)
DEFAULT_SEED = 20240601
SUITES = ("domain", "kobayashi", "wu", "curvature")


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float
    relation: str = "<="
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        self.passed = bool(self.passed)
        self.value = float(self.value)
        self.tolerance = float(self.tolerance)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name} value={self.value!r} {self.relation} {self.tolerance!r}"


def _cells():
    for m in M_GRID:
        for n in N_GRID:
            yield dm.EggParams(n, m)


def _rng(seed, *salt):
    return np.random.default_rng([seed, *[int(round(s * 1000)) for s in salt]])


def _rel(a, b):
    return abs(a - b) / abs(b)


def _unit(v):
    v = np.asarray(v, dtype=complex)
    return v / np.linalg.norm(v)


# -- domain -----------------------------------------------------------------

def check_balanced(seed=DEFAULT_SEED):
    bad = 0
    for params in _cells():
        rng = _rng(seed, params.m, params.n)
        pts = dm.sample_points(params, 200, rng)
        lam = rng.uniform(size=200) * np.exp(2j * np.pi * rng.uniform(size=200))
        bad += int(np.sum(dm.defining_function(params, lam[:, None] * pts) >= 1.0))
    return CheckResult("domain.balanced", bad == 0, float(bad), 0.0)


def check_minkowski_scaling(seed=DEFAULT_SEED):
    worst = 0.0
    for params in _cells():
        rng = _rng(seed, params.m, params.n, 1)
        for _ in range(50):
            v = rng.normal(size=params.n) + 1j * rng.normal(size=params.n)
            lam = complex(rng.normal(), rng.normal())
            q = dm.minkowski_functional(params, v)
            worst = max(worst, _rel(dm.minkowski_functional(params, lam * v), abs(lam) * q))
            # the gauge puts v/q on the boundary
            worst = max(worst, abs(dm.defining_function(params, v / q) - 1.0))
    return CheckResult("domain.minkowski_scaling", worst <= 1e-12, worst, 1e-12)


def check_automorphisms(seed=DEFAULT_SEED):
    member = 0
    inv = 0.0
    jac = 0.0
    chain = 0.0
    for params in _cells():
        rng = _rng(seed, params.m, params.n, 2)
        bases = dm.sample_points(params, 20, rng, shrink=0.9)
        for b in bases:
            phi = dm.normalizing_automorphism(params, b, dm.random_unitary(params.n - 1, rng))
            img = phi(b)
            inv = max(inv, float(np.max(np.abs(img[1:]))), abs(img[0].imag))
            pts = dm.sample_points(params, 50, rng, on_Z_fraction=0.1, shrink=0.9)
            out = phi(pts)
            member += int(np.sum(dm.defining_function(params, out) >= 1.0))
            back = phi.inverse()(out)
            inv = max(inv, float(np.max(np.abs(back - pts))))
            z = pts[0]
            jac = max(jac, _jacobian_fd_error(phi, z))
            other = dm.normalizing_automorphism(params, bases[0])
            lhs = (other.jacobian(phi(z)) @ phi.jacobian(z))
            comp = _Composite(other, phi)
            chain = max(chain, float(np.max(np.abs(lhs - _jacobian_fd(comp, z)))) / max(1.0, np.max(np.abs(lhs))))
    return [
        CheckResult("domain.automorphism_membership", member == 0, float(member), 0.0),
        CheckResult("domain.automorphism_inverse", inv <= 1e-10, inv, 1e-10),
        CheckResult("domain.jacobian_vs_fd", jac <= 1e-7, jac, 1e-7),
        CheckResult("domain.jacobian_chain_rule", chain <= 1e-8, chain, 1e-8),
    ]


class _Composite:
    def __init__(self, outer, inner):
        self.outer, self.inner = outer, inner

    def __call__(self, z):
        return self.outer(self.inner(z))


def _jacobian_fd(f, z, h=1e-5):
    # holomorphic map: d/dz_k = d/dx_k, with one Richardson level
    n = z.shape[0]
    cols = []
    for k in range(n):
        e = np.zeros(n, dtype=complex)
        e[k] = 1.0
        d1 = (f(z + h * e) - f(z - h * e)) / (2 * h)
        d2 = (f(z + h / 2 * e) - f(z - h / 2 * e)) / h
        cols.append((4 * d2 - d1) / 3)
    return np.array(cols).T


def _jacobian_fd_error(phi, z):
    return float(np.max(np.abs(phi.jacobian(z) - _jacobian_fd(phi, z))))


# -- kobayashi --------------------------------------------------------------

def check_slice_exactness():
    worst = 0.0
    for params in _cells():
        m = params.m
        for p in P_GRID:
            v = np.zeros(params.n, dtype=complex)
            v[0] = 0.7 - 0.2j
            worst = max(worst, _rel(kb.kobayashi_axis(params, p, v)[0], abs(v[0]) / (1 - p * p)))
            v = np.zeros(params.n, dtype=complex)
            v[1:] = np.linspace(0.3, 0.6, params.n - 1) * np.exp(1j * np.arange(1, params.n))
            ref = np.linalg.norm(v) / math.sqrt(1 - p ** (2 * m))
            worst = max(worst, _rel(kb.kobayashi_axis(params, p, v)[0], ref))
    return CheckResult("kobayashi.slice_exactness", worst <= 1e-10, worst, 1e-10)


def check_crossover():
    worst_t = 0.0
    worst_k = 0.0
    bracket_ok = True
    for params in _cells():
        for p in P_GRID:
            x0, t0, w0 = kb.solve_crossover(params, p)
            bracket_ok &= 1.0 < w0 < params.w_max
            worst_t = max(worst_t, abs(kb.compute_t(params, w0) - t0))
            v = np.zeros(params.n, dtype=complex)
            v[0] = 1.0
            v[1] = params.m * math.sqrt(w0) / p
            t = kb.compute_t(params, kb.compute_w(params, p, v))
            alpha = kb.solve_alpha(params, p, t)
            a = kb.k1(params, p, v, t, alpha)
            b = kb.k2(params, p, v)
            worst_k = max(worst_k, abs(a - b) / b)
    return [
        CheckResult("kobayashi.crossover_bracket", bool(bracket_ok), float(not bracket_ok), 0.0),
        CheckResult("kobayashi.crossover_t0", worst_t <= 1e-8, worst_t, 1e-8),
        CheckResult("kobayashi.crossover_K1_eq_K2", worst_k <= 1e-7, worst_k, 1e-7),
    ]


def check_regime_switch():
    worst = 0
    for params in _cells():
        for p in P_GRID:
            _, _, w0 = kb.solve_crossover(params, p)
            ws = np.linspace(1.0, params.w_max, 402)[1:-1]
            which = []
            for w in ws:
                v = np.zeros(params.n, dtype=complex)
                v[0] = 1.0
                v[1] = params.m * math.sqrt(w) / p
                t = kb.compute_t(params, w)
                a = kb.k1(params, p, v, t, kb.solve_alpha(params, p, t))
                which.append(a < kb.k2(params, p, v))
            which = np.array(which)
            switches = int(np.sum(which[1:] != which[:-1]))
            cut = np.argmax(~which) if not which.all() else len(ws)
            grid_ok = cut == 0 or ws[cut - 1] <= w0 <= ws[min(cut, len(ws) - 1)] + 1e-12
            worst = max(worst, abs(switches - 1) + (0 if grid_ok else 1))
    return CheckResult("kobayashi.single_regime_switch", worst == 0, float(worst), 0.0)


def check_indicatrix_roundtrip():
    worst = 0.0
    junction = 0.0
    for params in _cells():
        for p in P_GRID:
            samples = kb.indicatrix_boundary(params, p, 256)
            for s in samples:
                v = np.zeros(params.n, dtype=complex)
                v[0] = math.sqrt(s.y)
                v[1] = math.sqrt(s.x)
                worst = max(worst, abs(kb.kobayashi_axis(params, p, v)[0] - 1.0))
            last_up = [s for s in samples if s.branch is kb.Branch.UPPER][-1]
            junction = max(junction, abs(kb.lower_curve_y(params, p, last_up.x) - last_up.y))
    return [
        CheckResult("kobayashi.indicatrix_roundtrip", worst <= 1e-8, worst, 1e-8),
        CheckResult("kobayashi.curve_junction", junction <= 1e-8, junction, 1e-8),
    ]


def check_square_convexity():
    bad = 0
    for params in _cells():
        for p in P_GRID:
            bad += not kb.square_convexity_check(params, p, 512)["is_convex"]
    return CheckResult("kobayashi.square_convexity", bad == 0, float(bad), 0.0)


def _invariance_pairs(params, rng, trials, need_smooth=False):
    """Random ``(z, phi, vector)`` triples with ``z`` and ``phi(z)`` well inside."""
    out = []
    while len(out) < trials:
        z = dm.sample_points(params, 1, rng, shrink=0.9)[0]
        b = dm.sample_points(params, 1, rng, shrink=0.9)[0]
        phi = dm.normalizing_automorphism(params, b, dm.random_unitary(params.n - 1, rng))
        w = phi(z)
        if dm.defining_function(params, w) > 0.95:
            continue
        if need_smooth and min(abs(z[0]), abs(w[0])) < 1e-2:
            continue
        v = rng.normal(size=params.n) + 1j * rng.normal(size=params.n)
        out.append((z, phi, v))
    return out


def check_kobayashi_invariance(seed=DEFAULT_SEED, trials=100):
    worst = 0.0
    homog = 0.0
    for params in _cells():
        rng = _rng(seed, params.m, params.n, 3)
        for z, phi, v in _invariance_pairs(params, rng, trials):
            a = kb.kobayashi_general(params, z, v)
            b = kb.kobayashi_general(params, phi(z), phi.jacobian(z) @ v)
            worst = max(worst, _rel(b, a))
            lam = complex(rng.normal(), rng.normal())
            homog = max(homog, _rel(kb.kobayashi_general(params, z, lam * v), abs(lam) * a))
    return [
        CheckResult("kobayashi.automorphism_invariance", worst <= 1e-8, worst, 1e-8),
        CheckResult("kobayashi.homogeneity", homog <= 1e-12, homog, 1e-12),
    ]


def check_ball_domination(seed=DEFAULT_SEED):
    # E sits inside the ball, so its Kobayashi metric dominates the ball's
    worst = 0.0
    for params in _cells():
        rng = _rng(seed, params.m, params.n, 4)
        for _ in range(100):
            z = dm.sample_points(params, 1, rng, shrink=0.9)[0]
            v = rng.normal(size=params.n) + 1j * rng.normal(size=params.n)
            s = 1.0 - np.vdot(z, z).real
            ball = math.sqrt((s * np.vdot(v, v).real + abs(np.vdot(z, v)) ** 2)) / s
            k = kb.kobayashi_general(params, z, v)
            worst = max(worst, (ball - k) / ball)
    return CheckResult("kobayashi.dominates_ball_metric", worst <= 1e-12, worst, 1e-12)


# -- wu ---------------------------------------------------------------------

def check_fit(count=4096, refined=8192):
    worst = 0.0
    not_shrinking = 0
    for params in _cells():
        m = params.m
        for p in P_GRID:
            ref1 = (1 - p * p) ** -2
            ref2 = 1.0 / (1 - p ** (2 * m))
            f = wu.fit_min_volume_ellipsoid(params, p, count)
            g = wu.fit_min_volume_ellipsoid(params, p, refined)
            e1 = max(_rel(f.r1, ref1), _rel(f.r2, ref2))
            e2 = max(_rel(g.r1, ref1), _rel(g.r2, ref2))
            worst = max(worst, e1)
            # both fits sit at round-off; allow a few ulps of jitter
            if e2 > max(e1, 4 * np.finfo(float).eps):
                not_shrinking += 1
    return [
        CheckResult("wu.fit_reproduces_closed_form", worst <= 1e-3, worst, 1e-3),
        CheckResult("wu.fit_refinement_does_not_grow", not_shrinking == 0, float(not_shrinking), 0.0),
    ]


def check_containment(count=4096):
    over = -math.inf
    under = math.inf
    for params in _cells():
        for p in P_GRID:
            h = wu.wu_axis(params, p)
            top = -math.inf
            for s in kb.indicatrix_boundary(params, p, count):
                v = np.zeros(params.n, dtype=complex)
                v[0] = math.sqrt(s.y)
                v[1] = math.sqrt(s.x)
                top = max(top, h.length_squared(v))
            over = max(over, top - 1.0)
            under = min(under, top)
    return [
        CheckResult("wu.indicatrix_containment", over <= 1e-8, over, 1e-8),
        CheckResult("wu.ellipsoid_tightness", under >= 1 - 1e-5, under, 1 - 1e-5, ">="),
    ]


def check_wu_structure(seed=DEFAULT_SEED):
    axis = 0.0
    min_eig = math.inf
    for params in _cells():
        for p in P_GRID:
            z = np.zeros(params.n, dtype=complex)
            z[0] = p
            axis = max(axis, float(np.max(np.abs(wu.wu_general(params, z).entries
                                                 - wu.wu_axis(params, p).entries))))
        rng = _rng(seed, params.m, params.n, 5)
        pts = dm.sample_points(params, 500, rng, on_Z_fraction=0.2)
        min_eig = min(min_eig, float(np.linalg.eigvalsh(wu.wu_matrix(params.m, pts))[:, 0].min()))
    return [
        CheckResult("wu.axis_reduction", axis <= 1e-14, axis, 1e-14),
        CheckResult("wu.positive_definite", min_eig > 0.0, min_eig, 0.0, ">"),
    ]


def check_non_kahler():
    smallest = math.inf
    agreement = 0.0
    for params in _cells():
        for z1 in (0.2, 0.5, 0.8):
            d = wu.kahler_defect(params, z1)
            smallest = min(smallest, abs(d))
            agreement = max(agreement, abs(d - wu.kahler_defect_fd(params, z1)) / abs(d))
    return [
        CheckResult("wu.non_kahler_defect", smallest > 1e-3, smallest, 1e-3, ">"),
        CheckResult("wu.kahler_defect_fd_agreement", agreement <= 1e-6, agreement, 1e-6),
    ]


def check_wu_invariance(seed=DEFAULT_SEED, trials=100):
    worst = 0.0
    for params in _cells():
        rng = _rng(seed, params.m, params.n, 6)
        for z, phi, _ in _invariance_pairs(params, rng, trials):
            h = wu.wu_general(params, z).entries
            back = wu.pullback(wu.wu_general(params, phi(z)).entries, phi.jacobian(z))
            worst = max(worst, float(np.max(np.abs(back - h)) / np.max(np.abs(h))))
    return CheckResult("wu.pullback_invariance", worst <= 1e-8, worst, 1e-8)


def check_continuity_Z(radii=(1e-1, 1e-2, 1e-3), threshold=1e-4):
    worst = 0.0
    monotone = True
    exponents = []
    for params in _cells():
        for radius_hat in (0.0, 0.5):
            zhat = np.zeros(params.n - 1, dtype=complex)
            zhat[0] = radius_hat
            rep = wu.continuity_probe_Z(params, zhat, radii, threshold=threshold)
            monotone &= rep["decreasing"]
            worst = max(worst, rep["final"])
            exponents.append((params.m, rep["modulus_exponent"]))
    return [
        CheckResult("wu.continuity_Z_monotone", bool(monotone), float(not monotone), 0.0),
        CheckResult("wu.continuity_Z_threshold", worst < threshold, worst, threshold, "<",
                    {"modulus_exponents": exponents}),
    ]


# -- curvature --------------------------------------------------------------

def check_closed_form_curvature():
    worst = 0.0
    vanish = 0.0
    herm = 0.0
    for params in _cells():
        support = cv.closed_form_support(params.n)
        mask = np.ones((params.n,) * 4, dtype=bool)
        for idx in support:
            mask[idx] = False
        for p in P_GRID:
            closed = cv.curvature_axis_closed_form(params, p).components
            z = np.zeros(params.n, dtype=complex)
            z[0] = p
            t = cv.curvature_tensor_fd(params, z)
            scale = float(np.max(np.abs(closed)))
            worst = max(worst, max(_rel(t.components[i], closed[i]) for i in support))
            vanish = max(vanish, float(np.max(np.abs(t.components[mask]))) / scale)
            herm = max(herm, t.hermitian_residual() / scale)
    return [
        CheckResult("curvature.closed_form_agreement", worst <= 1e-5, worst, 1e-5),
        CheckResult("curvature.other_components_vanish", vanish <= 1e-7, vanish, 1e-7),
        CheckResult("curvature.hermitian_symmetry_axis", herm <= 1e-10, herm, 1e-10),
    ]


def check_hsc_bound(direction_count=1000):
    worst = -math.inf
    spread = math.inf
    for params in _cells():
        rep = cv.hsc_bound_scan(params, P_GRID, direction_count)
        worst = max(worst, rep["max_hsc"])
        spread = min(spread, rep["max_hsc"] - rep["min_hsc"])
    return [
        CheckResult("curvature.hsc_upper_bound", worst <= -0.5 + 1e-6, worst, -0.5 + 1e-6),
        CheckResult("curvature.hsc_non_constant", spread >= 0.1, spread, 0.1, ">="),
    ]


def check_comparison(seed=DEFAULT_SEED, samples=1000):
    worst = math.inf
    origin = 0.0
    for params in _cells():
        rep = cv.comparison_check(params, samples, _rng(seed, params.m, params.n, 7))
        worst = min(worst, rep["min_eigenvalue"])
        origin = max(origin, rep["origin_difference"])
    return [
        CheckResult("curvature.comparison_psd", worst >= -1e-9, worst, -1e-9, ">="),
        CheckResult("curvature.comparison_origin_equality", origin <= 1e-12, origin, 1e-12),
    ]


def currents_directions(n):
    """Eight slice directions: the axes plus mixed ``u_1``/``uhat`` directions."""
    raw = [
        [1, 0], [0, 1], [1, 1], [1, 1j], [2, 1], [1, 2], [1, -1], [0.3, 1 - 0.5j],
    ]
    out = []
    for k, r in enumerate(raw):
        v = np.zeros(n, dtype=complex)
        v[:2] = r
        if n > 2 and k >= 2:
            v[2:] = 0.5 * np.exp(1j * k)
        out.append(_unit(v))
    return out


def check_currents(c=0.1, sigmas=(0.1, 0.2, 0.3), radial=256, angular=128):
    worst = math.inf
    margins = {}
    for params in _cells():
        cell = []
        for u in currents_directions(params.n):
            rep = cv.currents_negativity_test(params, u, c, sigmas, radial, angular)
            cell.append(rep["margin"])
        margins[f"m={params.m},n={params.n}"] = min(cell)
        worst = min(worst, min(cell))
    return CheckResult("curvature.currents_negativity_on_Z", worst > 0, worst, 0.0, ">",
                       {"margins": margins, "c": c})


def check_hsc_invariance(seed=DEFAULT_SEED, trials=100):
    worst = 0.0
    for params in _cells():
        rng = _rng(seed, params.m, params.n, 8)
        for z, phi, xi in _invariance_pairs(params, rng, trials, need_smooth=True):
            a = cv.hsc(params, z, xi, "fd")
            b = cv.hsc(params, phi(z), phi.jacobian(z) @ xi, "fd")
            worst = max(worst, _rel(b, a))
    return CheckResult("curvature.hsc_invariance", worst <= 1e-5, worst, 1e-5)


def check_ball_calibration(seed=DEFAULT_SEED, trials=100):
    worst = 0.0
    for n in N_GRID:
        params = dm.EggParams(n, 0.25)
        rng = _rng(seed, n, 9)
        for _ in range(trials):
            z = rng.normal(size=n) + 1j * rng.normal(size=n)
            z *= 0.95 * rng.uniform() ** (1 / (2 * n)) / np.linalg.norm(z)
            xi = rng.normal(size=n) + 1j * rng.normal(size=n)
            t = cv.ball_tensor(params, z)
            worst = max(worst, abs(cv.sectional(t.metric, t.components, xi) + 2.0))
    return CheckResult("curvature.ball_pipeline_calibration", worst <= 1e-6, worst, 1e-6)


SUITE_CHECKS = {
    "domain": [check_balanced, check_minkowski_scaling, check_automorphisms],
    "kobayashi": [check_slice_exactness, check_crossover, check_regime_switch,
                  check_indicatrix_roundtrip, check_square_convexity,
                  check_kobayashi_invariance, check_ball_domination],
    "wu": [check_fit, check_containment, check_wu_structure, check_non_kahler,
           check_wu_invariance, check_continuity_Z],
    "curvature": [check_closed_form_curvature, check_hsc_bound, check_comparison,
                  check_currents, check_hsc_invariance, check_ball_calibration],
}


def worker_count():
    raw = os.environ.get("WU_METRIC_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    value = int(raw)
    if value < 1:
        raise ValueError("WU_METRIC_THREADS must be a positive integer")
    return value


def _flatten(result):
    return result if isinstance(result, list) else [result]


def run_suite(suite, seed=DEFAULT_SEED, workers=None):
    """Run one suite (or ``"all"``) and return its results in a fixed order."""
    names = SUITES if suite == "all" else (suite,)
    funcs = []
    for name in names:
        if name not in SUITE_CHECKS:
            raise ValueError(f"unknown suite {suite!r}")
        funcs.extend(SUITE_CHECKS[name])

    def call(f):
        if "seed" in f.__code__.co_varnames[:f.__code__.co_argcount]:
            return _flatten(f(seed=seed))
        return _flatten(f())

    workers = worker_count() if workers is None else workers
    with ThreadPoolExecutor(max_workers=workers) as pool:
        batches = list(pool.map(call, funcs))
    return [r for batch in batches for r in batch]
