"""Command-line entry point: ``spiralpencil <command> [options]``.

Every command accepts ``--config FILE`` (a JSON object whose keys are option
names with dashes replaced by underscores) and explicit flags, which win over
the file.  Outputs carry a metadata header with the resolved configuration.
Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .distribution import (
    MAX_DEGREE,
    branch_points,
    decay_fit,
    envelope_constant,
    fiber_roots,
    spherical_harmonic,
    uniform_stat,
)
from .errors import (
    DomainError,
    EvaluationError,
    ResolutionError,
    RootFailureError,
    SpiralPencilError,
    TruncationError,
)
from .plambda import LambdaSequence, lattice_zero, p_lambda, periodicity_residual, shift_residual
from .sections import density_identity_residuals, energy_functional, spiral_pair
from .sphere import INFINITY, quadrature_grid, random_points
from .spiral import CUBE_ROOT_OFFSETS, TRIPLE_OFFSETS, SpiralConfig, generate_spiral, generate_triple_spiral
from .transversality import (
    CALIBRATED_NORMALIZATION,
    CALIBRATED_SCALE,
    bounds_report,
    find_extrema,
    min_grad_normalized,
    min_grid_size,
)

THREADS_ENV = "SPIRALPENCIL_THREADS"
DEFAULT_TABLE_KS = [50, 100, 150, 170, 180, 190, 200]
DEFAULT_GRAD_KS = [100, 200, 500, 700, 900, 1000]
EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3


class ValidationError(SpiralPencilError, ValueError):
    """A configuration value failed validation."""


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def _json_default(x):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, complex):
        return [x.real, x.imag]
    return str(x)


# ---------------------------------------------------------------------------
# parsing helpers


def _int_list(text) -> list:
    if isinstance(text, list):
        return [int(v) for v in text]
    return [int(v) for v in str(text).split(",") if v.strip()]


def _parse_lambda(text):
    text = str(text).strip().lower()
    if text in ("inf", "infinity"):
        return INFINITY
    return complex(text.replace("i", "j"))


def _lambda_list(text) -> list:
    if isinstance(text, list):
        return [_parse_lambda(v) for v in text]
    return [_parse_lambda(v) for v in str(text).split(",") if v.strip()]


def _lam_label(lam) -> str:
    if lam is INFINITY:
        return "inf"
    lam = complex(lam)
    return f"{lam.real:.17g}{lam.imag:+.17g}j"


def _require(cond: bool, message: str):
    if not cond:
        raise ValidationError(message)


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    _require(n >= 1, f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def _ordered_map(fn, items) -> list:
    """Map over items, possibly in threads; results keep the input order."""
    n = _threads()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# output


def _metadata(args, command: str, extra: dict | None = None) -> dict:
    config = {k: v for k, v in vars(args).items() if k not in ("func", "config", "output", "command")}
    meta = {
        "command": command,
        "version": __version__,
        "config": config,
        "min_grad_normalization": {"name": CALIBRATED_NORMALIZATION, "scale": CALIBRATED_SCALE},
    }
    meta.update(extra or {})
    return meta


def _timestamp() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _render_csv(meta: dict, header: list, rows: list) -> str:
    buf = io.StringIO()
    buf.write(f"# generated: {_timestamp()}\n")
    buf.write("# metadata: " + json.dumps(meta, sort_keys=True, default=_json_default) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _render_json(meta: dict, data) -> str:
    text = json.dumps({"metadata": meta, "data": data}, indent=2, sort_keys=True, default=_json_default)
    return f'{{"generated": "{_timestamp()}"}}\n' + text + "\n"


def _emit(args, meta: dict, header: list, rows: list, data=None):
    if args.format == "json":
        payload = data if data is not None else [dict(zip(header, r)) for r in rows]
        text = _render_json(meta, payload)
    else:
        text = _render_csv(meta, header, rows)
    if args.output and args.output != "-":
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_spiral(args):
    _require(args.k is not None, "--k is required")
    _require(args.k >= 1, f"k must be >= 1, got {args.k}")
    _require(args.spacing > 0, f"spacing must be > 0, got {args.spacing}")
    if args.variant == "triple":
        offsets = CUBE_ROOT_OFFSETS if args.offsets == "cube" else TRIPLE_OFFSETS
        c = generate_triple_spiral(args.k, args.spacing, offsets)
    else:
        c = generate_spiral(SpiralConfig(args.k, args.variant, args.spacing))
    rows = [
        (i + 1, h, t, z.real, z.imag) for i, (h, t, z) in enumerate(zip(c.h, c.theta, c.chart_zeros))
    ]
    _emit(args, _metadata(args, "spiral"), ["index", "h", "theta", "re_z", "im_z"], rows)


def _extrema_row(k, args):
    pair = spiral_pair(k, args.spacing)
    n = max(min_grid_size(k), int(math.ceil(args.grid_factor * min_grid_size(k))))
    return k, find_extrema(pair, (n, n))


def cmd_tables(args):
    ks = _int_list(args.k_list)
    gks = _int_list(args.grad_k_list)
    _require(len(ks) > 0 and len(gks) > 0, "k-list must be nonempty")
    _require(all(k >= 1 for k in ks + gks), "all k must be >= 1")
    _require(args.grid_factor >= 1.0, f"grid-factor must be >= 1, got {args.grid_factor}")
    reports = _ordered_map(lambda k: _extrema_row(k, args), ks)
    rows = []
    for k, r in reports:
        rows.append(("max", k, r.max_rho, r.grid_used[0], r.grid_used[1]))
    for k, r in reports:
        rows.append(("min", k, r.min_rho, r.grid_used[0], r.grid_used[1]))
    grads = _ordered_map(lambda k: (k, min_grad_normalized(spiral_pair(k, args.spacing).p)), gks)
    for k, v in grads:
        rows.append(("min_grad", k, v, "", ""))
    meta = _metadata(args, "tables", {"refinement_iters": reports[0][1].refinement_iters})
    _emit(args, meta, ["table", "k", "value", "n_h", "n_theta"], rows)


def cmd_extrema(args):
    _require(args.k is not None, "--k is required")
    _require(args.k >= 1, f"k must be >= 1, got {args.k}")
    pair = spiral_pair(args.k, args.spacing, args.variant)
    need = min_grid_size(pair.degree)
    grid = (args.n_h or need, args.n_theta or need)
    r = find_extrema(pair, grid)
    meta = _metadata(args, "extrema", {"grid_used": list(r.grid_used)})
    _emit(args, meta, list(r.to_dict().keys()), [], data=r.to_dict())


def cmd_bounds(args):
    _require(args.alpha > 0, f"alpha must be > 0, got {args.alpha}")
    _require(args.c > 0, f"c must be > 0, got {args.c}")
    _require(args.delta >= 0 and args.M >= 0, "delta and M must be >= 0")
    data = bounds_report(args.alpha, (args.delta, args.M, args.c))
    _emit(args, _metadata(args, "bounds"), [], [], data=data)


def cmd_distribution(args):
    ks = _int_list(args.k_list)
    lams = _lambda_list(args.lambda_list)
    _require(len(ks) > 0, "k-list must be nonempty")
    _require(len(lams) > 0, "lambda-list must be nonempty")
    _require(all(1 <= k <= MAX_DEGREE for k in ks), f"all k must lie in [1, {MAX_DEGREE}]")
    f = spherical_harmonic(args.l, args.m)
    jobs = [(k, lam) for k in ks for lam in lams]

    def run(job):
        k, lam = job
        fs = fiber_roots(spiral_pair(k, args.spacing), lam)
        return k, lam, uniform_stat(fs, f), fs.n_infinite, float(np.max(fs.residuals, initial=0.0))

    results = _ordered_map(run, jobs)
    rows = [(k, _lam_label(lam), s, n_inf, res) for k, lam, s, n_inf, res in results]
    extra = {"harmonic": {"l": args.l, "m": args.m, "laplacian_sup": f.laplacian_sup}}
    pairs = [(k, s) for k, _, s, _, _ in results]
    try:
        fit = decay_fit(pairs)
        extra["decay_fit"] = {"slope": fit.slope, "intercept": fit.intercept, "residual": fit.residual,
                              "n_excluded": fit.n_excluded}
    except DomainError as exc:
        extra["decay_fit"] = {"unavailable": str(exc)}
    if f.laplacian_sup > 0:
        extra["envelope_constant"] = envelope_constant(pairs, f.laplacian_sup)
    _emit(args, _metadata(args, "distribution", extra), ["k", "lambda", "stat", "n_infinite", "max_residual"], rows)


def cmd_branch(args):
    _require(args.k is not None, "--k is required")
    _require(1 <= args.k <= MAX_DEGREE, f"k must lie in [1, {MAX_DEGREE}], got {args.k}")
    fs = branch_points(spiral_pair(args.k, args.spacing))
    rows = [(i, "inf" if np.isinf(r) else r.real, 0.0 if np.isinf(r) else r.imag, e)
            for i, (r, e) in enumerate(zip(fs.roots, fs.residuals))]
    meta = _metadata(args, "branch", {"n_roots": len(fs.roots), "n_infinite": fs.n_infinite, "sweeps": fs.sweeps})
    _emit(args, meta, ["index", "re", "im", "residual"], rows)


def cmd_energy(args):
    _require(args.k is not None, "--k is required")
    _require(args.k >= 1, f"k must be >= 1, got {args.k}")
    _require(args.exponent in (2, 4), f"exponent must be 2 or 4, got {args.exponent}")
    _require(args.n_h >= 2 and args.n_theta >= 2, "grid sizes must be >= 2")
    grid = quadrature_grid(args.n_h, args.n_theta)
    value = energy_functional(spiral_pair(args.k, args.spacing), grid, args.exponent)
    meta = _metadata(args, "energy", {"grid": [args.n_h, args.n_theta]})
    _emit(args, meta, ["k", "exponent", "value"], [(args.k, args.exponent, value)])


def _lambda_sequence(spec: str, M: int) -> LambdaSequence:
    spec = str(spec)
    if spec == "zero":
        return LambdaSequence.constant(0.0, M)
    if spec.startswith("random:"):
        return LambdaSequence.random(np.random.default_rng(int(spec.split(":", 1)[1])), M)
    if spec.startswith("shifted:"):
        return LambdaSequence.random(np.random.default_rng(int(spec.split(":", 1)[1])), M).renormalized_shift()
    try:
        table = json.loads(spec)
    except json.JSONDecodeError:
        raise ValidationError(f"unrecognised lambda spec {spec!r}") from None
    return LambdaSequence.from_mapping({int(m): v for m, v in table.items()}, M)


def cmd_plambda(args):
    _require(args.M >= 1, f"M must be >= 1, got {args.M}")
    _require(args.n >= 1, f"n must be >= 1, got {args.n}")
    seq = _lambda_sequence(args.lambda_spec, args.M)
    re = np.linspace(args.re_min, args.re_max, args.n)
    im = np.linspace(args.im_min, args.im_max, args.n)
    rows = []
    per, shift = 0.0, 0.0
    for y in im:
        for x in re:
            z = complex(x, y)
            v = p_lambda(seq, z)
            zero = lattice_zero(seq, z) or v.is_zero
            rows.append((x, y, v.log_mag, v.arg, int(zero)))
            if not zero:
                per = max(per, periodicity_residual(seq, z))
                shift = max(shift, shift_residual(seq, z))
    meta = _metadata(args, "plambda", {"periodicity_residual": per, "shift_residual": shift})
    _emit(args, meta, ["re", "im", "log_mag", "arg", "zero"], rows)


def cmd_pde_check(args):
    ks = _int_list(args.k_list)
    _require(len(ks) > 0 and all(k >= 1 for k in ks), "k-list must be nonempty with k >= 1")
    _require(args.n_points >= 1, f"n-points must be >= 1, got {args.n_points}")

    def run(k):
        pts = random_points(args.n_points, np.random.default_rng(args.seed))
        _, _, res = density_identity_residuals(spiral_pair(k, args.spacing), pts)
        return k, float(np.max(res)), float(np.mean(res))

    rows = _ordered_map(run, ks)
    _emit(args, _metadata(args, "pde-check"), ["k", "max_rel_residual", "mean_rel_residual"], rows)


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file of option values (flags override)")
    p.add_argument("--output", "-o", default="-", help="output path, '-' for stdout")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--spacing", type=float, default=3.6, help="spiral step constant")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spiralpencil", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spiral", help="spiral point configuration as CSV")
    _common(p)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--variant", choices=("standard", "triple"), default="standard")
    p.add_argument("--offsets", choices=("sixth", "cube"), default="sixth",
                   help="triple-spiral offsets: pi/3, 2pi/3 (sixth) or 2pi/3, 4pi/3 (cube)")
    p.set_defaults(func=cmd_spiral)

    p = sub.add_parser("tables", help="max, min and min-gradient tables")
    _common(p)
    p.add_argument("--k-list", default=",".join(map(str, DEFAULT_TABLE_KS)))
    p.add_argument("--grad-k-list", default=",".join(map(str, DEFAULT_GRAD_KS)))
    p.add_argument("--grid-factor", type=float, default=1.0, help="multiple of the minimum scan size")
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("extrema", help="extrema report for one spiral pair")
    _common(p)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--variant", choices=("standard", "triple"), default="standard")
    p.add_argument("--n-h", type=int, default=None)
    p.add_argument("--n-theta", type=int, default=None)
    p.set_defaults(func=cmd_extrema, format="json")

    p = sub.add_parser("bounds", help="closed-form bound constants")
    _common(p)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--M", type=float, default=1.0)
    p.add_argument("--c", type=float, default=1.0)
    p.set_defaults(func=cmd_bounds, format="json")

    p = sub.add_parser("distribution", help="fiber equidistribution statistics and decay fit")
    _common(p)
    p.add_argument("--k-list", default="25,50,100,200")
    p.add_argument("--lambda-list", default="1,1j")
    p.add_argument("--l", type=int, default=2)
    p.add_argument("--m", type=int, default=0)
    p.set_defaults(func=cmd_distribution)

    p = sub.add_parser("branch", help="branch points of the spiral pair")
    _common(p)
    p.add_argument("--k", type=int, default=None)
    p.set_defaults(func=cmd_branch)

    p = sub.add_parser("energy", help="integral of a power of the pullback density")
    _common(p)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--exponent", type=int, default=2)
    p.add_argument("--n-h", type=int, default=128)
    p.add_argument("--n-theta", type=int, default=128)
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("plambda", help="P_lambda on a grid with periodicity residuals")
    _common(p)
    p.add_argument("--lambda-spec", default="zero", help="zero | random:SEED | shifted:SEED | JSON {m: value}")
    p.add_argument("--M", type=int, default=12)
    p.add_argument("--re-min", type=float, default=-1.0)
    p.add_argument("--re-max", type=float, default=1.0)
    p.add_argument("--im-min", type=float, default=-2.0)
    p.add_argument("--im-max", type=float, default=2.0)
    p.add_argument("--n", type=int, default=10)
    p.set_defaults(func=cmd_plambda)

    p = sub.add_parser("pde-check", help="density identity residuals at random points")
    _common(p)
    p.add_argument("--k-list", default="20,50")
    p.add_argument("--n-points", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_pde_check)
    return parser


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config {path!r}: {exc}") from None
    if not isinstance(cfg, dict):
        raise ValidationError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in cfg.items()}


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        cfg = _load_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise ValidationError(f"unknown config keys: {', '.join(unknown)}")
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (RootFailureError, ResolutionError, EvaluationError, TruncationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
