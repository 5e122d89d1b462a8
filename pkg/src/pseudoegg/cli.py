"""Command-line front end.

Exit codes: 0 success, 1 failed verification, 2 parse error, 3 point or
parameters outside the domain, 4 numerical infeasibility.
"""

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from xml.sax.saxutils import escape

import numpy as np

from . import checks
from . import curvature as cv
from . import domain as dm
from . import kobayashi as kb
from . import wu
from .exceptions import DomainError, InfeasibleError

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_PARSE = 2
EXIT_DOMAIN = 3
EXIT_INFEASIBLE = 4

QUANTITIES = ("hsc", "wu_entries", "kobayashi_value")
SCAN_COLUMNS = {
    "hsc": ["m", "n", "p", "direction", "value"],
    "wu_entries": ["m", "n", "p", "i", "j", "re", "im"],
    "kobayashi_value": ["m", "n", "p", "direction", "value", "regime"],
}
DEFAULT_DIRECTIONS = 100


class ParseError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParseError(message)


# -- parsing ----------------------------------------------------------------

def parse_complex_vector(text):
    """Parse ``"re,im;re,im;..."`` into a complex vector."""
    if text is None or not text.strip():
        raise ParseError("empty vector")
    out = []
    for part in text.split(";"):
        pieces = part.split(",")
        if len(pieces) != 2:
            raise ParseError(f"vector entry {part!r} is not of the form re,im")
        try:
            re_, im_ = (float(s) for s in pieces)
        except ValueError as exc:
            raise ParseError(f"vector entry {part!r}: {exc}") from None
        if not (math.isfinite(re_) and math.isfinite(im_)):
            raise ParseError(f"vector entry {part!r} is not finite")
        out.append(complex(re_, im_))
    return np.array(out, dtype=complex)


def _parse_floats(key, text):
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise ParseError(f"grid key {key!r}: {exc}") from None


def parse_grid(text):
    """Parse ``"p=0.1,0.5;m=0.25;n=2;dirs=100"``.

    Missing keys fall back to the standard grid; a key with no values gives an
    empty grid.
    """
    grid = {"m": list(checks.M_GRID), "n": list(checks.N_GRID),
            "p": list(checks.P_GRID), "dirs": DEFAULT_DIRECTIONS}
    if text is None:
        return grid
    for part in filter(None, (s.strip() for s in text.split(";"))):
        key, sep, value = part.partition("=")
        key = key.strip()
        if not sep or key not in grid:
            raise ParseError(f"bad grid entry {part!r}")
        values = _parse_floats(key, value)
        if key == "n":
            if any(v != int(v) for v in values):
                raise ParseError("grid n values must be integers")
            grid["n"] = [int(v) for v in values]
        elif key == "dirs":
            if len(values) != 1 or values[0] != int(values[0]) or values[0] < 1:
                raise ParseError("dirs must be one positive integer")
            grid["dirs"] = int(values[0])
        else:
            grid[key] = values
    return grid


# -- serialization ----------------------------------------------------------

def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": _jsonable(x.real), "im": _jsonable(x.imag)}
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def dumps(obj):
    # json writes floats with repr, the shortest string that round-trips
    return json.dumps(_jsonable(obj), indent=2, sort_keys=False, allow_nan=False) + "\n"


def _cell(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(columns, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


# -- commands ---------------------------------------------------------------

def _params(args):
    return dm.EggParams(args.n, args.m)


def _point(args, params):
    if args.z is not None:
        return dm.as_vector(params, parse_complex_vector(args.z))
    if args.p is not None:
        z = np.zeros(params.n, dtype=complex)
        z[0] = args.p
        return z
    raise ParseError("a point is required: pass --p or --z")


def cmd_kobayashi(args):
    params = _params(args)
    v = dm.as_vector(params, parse_complex_vector(args.v))
    if args.z is None:
        if args.p is None:
            raise ParseError("a point is required: pass --p or --z")
        value, breakdown = kb.kobayashi_axis(params, args.p, v)
        out = {"m": params.m, "n": params.n, "point": _point(args, params), "v": v}
    else:
        z = dm.require_inside(params, parse_complex_vector(args.z))
        phi, q = dm.normalize_point(params, z)
        value, breakdown = kb.kobayashi_axis(params, q, phi.jacobian(z) @ v)
        out = {"m": params.m, "n": params.n, "point": z, "v": v, "normalized_p": q}
    out.update(breakdown.as_dict())
    out["value"] = value
    return dumps(out), EXIT_OK


def cmd_wu(args):
    params = _params(args)
    form = wu.wu_general(params, _point(args, params))
    out = {
        "m": params.m, "n": params.n, "point": form.base.z,
        "matrix": form.entries,
        "eigenvalues": form.eigenvalues(),
        "positive_definite": form.is_positive_definite(),
        "hermitian_residual": form.hermitian_residual(),
    }
    return dumps(out), EXIT_OK


def cmd_fit(args):
    params = _params(args)
    if args.p is None:
        raise ParseError("fit needs --p")
    p = args.p
    fit = wu.fit_min_volume_ellipsoid(params, p, args.count)
    ref1 = (1.0 - p * p) ** -2
    ref2 = 1.0 / (1.0 - p ** (2 * params.m))
    out = {
        "m": params.m, "n": params.n, "p": p, "count": args.count,
        "r1": fit.r1, "r2": fit.r2,
        "r1_reference": ref1, "r2_reference": ref2,
        "r1_relative_error": abs(fit.r1 - ref1) / ref1,
        "r2_relative_error": abs(fit.r2 - ref2) / ref2,
        "objective": fit.objective,
        "max_violation": fit.max_violation,
        "samples_used": fit.samples_used,
    }
    if args.emit_svg:
        with open(args.emit_svg, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(render_svg(params, p, args.count, fit))
        out["svg"] = args.emit_svg
    return dumps(out), EXIT_OK


def cmd_verify(args):
    results = checks.run_suite(args.suite, seed=args.seed)
    ok = all(r.passed for r in results)
    if args.format == "csv":
        text = write_csv(["name", "passed", "value", "relation", "tolerance"],
                         [[r.name, str(r.passed).lower(), r.value, r.relation, r.tolerance]
                          for r in results])
    else:
        text = dumps({
            "suite": args.suite, "seed": args.seed, "passed": ok,
            "checks": [{"name": r.name, "passed": r.passed, "value": r.value,
                        "relation": r.relation, "tolerance": r.tolerance,
                        "detail": r.detail} for r in results],
        })
    return text, EXIT_OK if ok else EXIT_VERIFY


def _scan_cell(quantity, m, n, p, dirs):
    params = dm.EggParams(n, m)
    rows = []
    if quantity == "wu_entries":
        h = wu.wu_axis(params, p).entries
        for i in range(n):
            for j in range(n):
                rows.append([m, n, p, i, j, float(h[i, j].real), float(h[i, j].imag)])
        return rows
    directions = cv.sphere_directions(n, dirs)
    if quantity == "hsc":
        t = cv.curvature_axis_closed_form(params, p)
        for k, xi in enumerate(directions):
            rows.append([m, n, p, k, cv.sectional(t.metric, t.components, xi)])
    else:
        for k, v in enumerate(directions):
            value, b = kb.kobayashi_axis(params, p, v)
            rows.append([m, n, p, k, value, b.regime.value])
    return rows


def cmd_scan(args):
    grid = parse_grid(args.grid)
    cells = [(m, n, p) for m in grid["m"] for n in grid["n"] for p in grid["p"]]
    for m, n, p in cells:
        dm.EggParams(n, m)
        if args.quantity == "hsc" and not 0.0 < p < 1.0:
            raise DomainError(f"hsc scan needs 0 < p < 1, got {p!r}")
    with ThreadPoolExecutor(max_workers=checks.worker_count()) as pool:
        batches = list(pool.map(lambda c: _scan_cell(args.quantity, *c, grid["dirs"]), cells))
    rows = [r for batch in batches for r in batch]
    return write_csv(SCAN_COLUMNS[args.quantity], rows), EXIT_OK


# -- svg --------------------------------------------------------------------

def render_svg(params, p, count, fit, size=480, pad=48):
    """Indicatrix K-curves and the fitted ellipse in square coordinates."""
    samples = kb.indicatrix_boundary(params, p, count)
    x_top = max(1.0 / fit.r2, max(s.x for s in samples)) * 1.05
    y_top = max(1.0 / fit.r1, max(s.y for s in samples)) * 1.05
    inner = size - 2 * pad

    def sx(x):
        return pad + inner * x / x_top

    def sy(y):
        return size - pad - inner * y / y_top

    def polyline(points, colour, label):
        pts = " ".join(f"{sx(x):.4f},{sy(y):.4f}" for x, y in points)
        return (f'<polyline id="{label}" fill="none" stroke="{colour}" '
                f'stroke-width="2" points="{pts}"/>')

    upper = [(s.x, s.y) for s in samples if s.branch is kb.Branch.UPPER]
    lower = [(s.x, s.y) for s in samples if s.branch is kb.Branch.LOWER]
    q = np.array([fit.r1 * s.y + fit.r2 * s.x for s in samples])
    touch = [samples[i] for i in np.nonzero(q >= 1.0 - 1e-9)[0]]
    title = escape(f"m={params.m!r} n={params.n} p={p!r} r1={fit.r1!r} r2={fit.r2!r}")
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f"<title>{title}</title>",
        f'<line id="x-axis" x1="{sx(0):.4f}" y1="{sy(0):.4f}" x2="{sx(x_top):.4f}" '
        f'y2="{sy(0):.4f}" stroke="black"/>',
        f'<line id="y-axis" x1="{sx(0):.4f}" y1="{sy(0):.4f}" x2="{sx(0):.4f}" '
        f'y2="{sy(y_top):.4f}" stroke="black"/>',
        f'<text x="{size - pad:.4f}" y="{size - pad / 3:.4f}">|vhat|^2</text>',
        f'<text x="{pad / 4:.4f}" y="{pad / 2:.4f}">|v1|^2</text>',
        polyline(upper, "#1f77b4", "upper-curve"),
        polyline(lower, "#2ca02c", "lower-curve"),
        polyline([(0.0, 1.0 / fit.r1), (1.0 / fit.r2, 0.0)], "#d62728", "ellipse"),
    ]
    for k, s in enumerate(touch):
        parts.append(f'<circle id="tangency-{k}" class="tangency" cx="{sx(s.x):.4f}" '
                     f'cy="{sy(s.y):.4f}" r="5" fill="#d62728"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# -- entry point ------------------------------------------------------------

def build_parser():
    parser = _Parser(prog="pseudoegg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, point=True):
        p.add_argument("--m", type=float, default=0.25)
        p.add_argument("--n", type=int, default=2)
        p.add_argument("--seed", type=int, default=checks.DEFAULT_SEED)
        p.add_argument("--format", choices=("json", "csv"), default=None)
        if point:
            p.add_argument("--p", type=float)
            p.add_argument("--z")

    p = sub.add_parser("kobayashi", help="Kobayashi metric with all intermediates")
    common(p)
    p.add_argument("--v", required=True)

    p = sub.add_parser("wu", help="Wu metric matrix and eigenvalues")
    common(p)

    p = sub.add_parser("fit", help="minimal-volume ellipsoid around the indicatrix")
    common(p)
    p.add_argument("--count", type=int, default=4096)
    p.add_argument("--emit-svg", dest="emit_svg")

    p = sub.add_parser("verify", help="run an invariant suite over the standard grid")
    common(p, point=False)
    p.add_argument("--suite", choices=checks.SUITES + ("all",), default="all")

    p = sub.add_parser("scan", help="CSV parameter sweep")
    common(p, point=False)
    p.add_argument("--quantity", choices=QUANTITIES, required=True)
    p.add_argument("--grid")
    return parser


COMMANDS = {"kobayashi": cmd_kobayashi, "wu": cmd_wu, "fit": cmd_fit,
            "verify": cmd_verify, "scan": cmd_scan}
JSON_ONLY = ("kobayashi", "wu", "fit")


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if args.command in JSON_ONLY and args.format == "csv":
            raise ParseError(f"{args.command} only emits json")
        if args.command == "scan" and args.format == "json":
            raise ParseError("scan only emits csv")
        text, code = COMMANDS[args.command](args)
    except ParseError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_PARSE
    except DomainError as exc:
        print(f"domain error: {exc}", file=stderr)
        return EXIT_DOMAIN
    except InfeasibleError as exc:
        print(f"numerically infeasible: {exc}", file=stderr)
        return EXIT_INFEASIBLE
    except ValueError as exc:
        # e.g. a bad WU_METRIC_THREADS value
        print(f"error: {exc}", file=stderr)
        return EXIT_PARSE
    stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
