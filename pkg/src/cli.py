# FILE: src/cli.py
"""
gralg command line.

    python -m src.cli verify schwarzschild_isotropic --box "t:0..0, x:5..50, y:5..50, z:5..50"
    python -m src.cli tensors minkowski_spherical --point 0,2,1.0471975512,0
    python -m src.cli mass schwarzschild_isotropic --kind ll --param m=1
    python -m src.cli catalog

Exit codes: 0 pass, 1 identity failure, 2 parse / usage error, 3 domain error, 4 precondition error.
"""
import argparse
import sys

import numpy as np

from src.config import (
    DEFAULT_POINTS,
    DEFAULT_SEED,
    FD_POINTS,
    FD_STEP,
    MASS_FIT_DEGREE,
    REPORT_HEADER,
    THREADS,
    TOL_ALGEBRA,
    TOL_FD,
    TOL_JET,
    logger,
)
from src.geometry import geometry_at
from src.jet import JetDomainError
from src.mass import MASS_KINDS, MassPreconditionError, mass_extrapolated, render_mass
from src.metric_dsl import (
    EvaluationError,
    MetricSyntaxError,
    catalog_names,
    load_metric,
    print_metric,
    with_params,
)
from src.multivector import SignatureError
from src.superpotential import SuperpotentialPoint
from src.verifier import Tolerances, fmt_number, parse_box, render_report, run_verification

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_DOMAIN, EXIT_PRECONDITION = 0, 1, 2, 3, 4
KIND_ALIASES = {"ll": "landau_lifshitz", "e": "einstein"}


class UsageError(ValueError):
    """Malformed command-line value."""


# =========================
# Argument helpers
# =========================
def parse_params(items):
    overrides = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"bad --param {item!r}; expected name=value")
        try:
            overrides[key.strip()] = float(value)
        except ValueError:
            raise UsageError(f"bad --param {item!r}; value is not a number") from None
    return overrides


def parse_floats(text, what, count=None):
    try:
        values = [float(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise UsageError(f"bad {what} {text!r}") from None
    if count is not None and len(values) != count:
        raise UsageError(f"{what} needs {count} comma-separated numbers, got {len(values)}")
    return values


def parse_nodes(text):
    a, sep, b = text.lower().partition("x")
    try:
        return int(a), int(b)
    except ValueError:
        raise UsageError(f"bad --nodes {text!r}; expected e.g. 64x128") from None


def resolve_metric(args):
    spec = load_metric(args.metric)
    return with_params(spec, parse_params(args.param))


# =========================
# Subcommands
# =========================
def cmd_verify(args):
    spec = resolve_metric(args)
    tol = Tolerances(jet=args.tol_jet, fd=args.tol_fd, algebra=args.tol_algebra, fd_step=args.fd_step)
    report = run_verification(
        spec,
        parse_box(args.box, spec.coords),
        n_points=args.points,
        seed=args.seed,
        tol=tol,
        fd_points=args.fd_points,
        fd_mode=args.fd,
        vacuum=args.vacuum,
        algebra_cases=args.algebra_cases,
        threads=args.threads,
    )
    sys.stdout.write(render_report(report, args.format))
    return EXIT_OK if report.passed else EXIT_FAIL


def tensor_blocks(spec, point):
    """Labelled arrays at one point, in a fixed order."""
    sp = SuperpotentialPoint(geometry_at(spec, point))
    gp, mj = sp.geometry, sp.metric
    lag, theta = sp.theta
    return [
        ("g", mj.g),
        ("det_g", np.array(mj.det_g)),
        ("Gamma", gp.gamma),
        ("Ricci", gp.ricci),
        ("R", np.array(gp.scalar)),
        ("G", gp.einstein_lower),
        ("S", sp.S),
        ("U", sp.freud.U),
        ("t", sp.t.lower),
        ("t_canonical", sp.t.canonical),
        ("e", sp.einstein.e),
        ("l", sp.landau_lifshitz.l),
        ("L", np.array(lag)),
        ("Theta", np.array(theta)),
    ]


def render_tensors(spec, point, blocks, fmt="text"):
    lines = [REPORT_HEADER]
    where = ",".join(fmt_number(x) for x in point)
    if fmt == "kv":
        lines += [f"metric={spec.name}", f"point={where}"]
        for label, arr in blocks:
            for idx in np.ndindex(arr.shape):
                key = ".".join([label] + [str(i) for i in idx])
                lines.append(f"{key}={fmt_number(arr[idx])}")
        return "\n".join(lines) + "\n"

    lines += [f"# metric: {spec.name}", f"# point: ({where})  coords: {', '.join(spec.coords)}"]
    for label, arr in blocks:
        if arr.ndim == 0:
            lines.append(f"{label} = {fmt_number(arr)}")
            continue
        lines.append(f"[{label}]")
        for idx in np.ndindex(arr.shape):
            lines.append(f"  {label}[{','.join(map(str, idx))}] = {fmt_number(arr[idx])}")
    return "\n".join(lines) + "\n"


def cmd_tensors(args):
    spec = resolve_metric(args)
    point = parse_floats(args.point, "--point", count=4)
    sys.stdout.write(render_tensors(spec, point, tensor_blocks(spec, point), args.format))
    return EXIT_OK


def cmd_mass(args):
    spec = resolve_metric(args)
    kind = KIND_ALIASES.get(args.kind, args.kind)
    if kind not in MASS_KINDS:
        raise UsageError(f"unknown --kind {args.kind!r}; expected one of ll, {', '.join(MASS_KINDS)}")
    n_theta, n_phi = parse_nodes(args.nodes)
    result = mass_extrapolated(
        spec, kind, parse_floats(args.radii, "--radii"), n_theta=n_theta, n_phi=n_phi,
        degree=args.degree, threads=args.threads,
    )
    sys.stdout.write(render_mass(result, args.format))
    return EXIT_OK


def cmd_catalog(args):
    if args.name:
        sys.stdout.write(print_metric(load_metric(args.name)))
        return EXIT_OK
    sys.stdout.write("\n".join(catalog_names()) + "\n")
    return EXIT_OK


# =========================
# Parser
# =========================
def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "kv"), default="text")
    common.add_argument("--threads", type=int, default=THREADS, help="worker threads (or set GRALG_THREADS)")
    common.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING (or set LOG_LEVEL)")

    parser = argparse.ArgumentParser(prog="gralg", description="Clifford-form checks of gravitational superpotentials")
    sub = parser.add_subparsers(dest="command", required=True)

    def metric_args(p):
        p.add_argument("metric", help="catalog name or path to a .metric file")
        p.add_argument("--param", action="append", default=[], metavar="NAME=VALUE",
                       help="override a metric parameter; m=... sets r_g = 2m")

    v = sub.add_parser("verify", parents=[common], help="run the identity suite at sampled points")
    metric_args(v)
    v.add_argument("--box", default=None, help='e.g. "t:0..0, x:5..50"; unnamed coordinates use 2..3')
    v.add_argument("--points", type=int, default=DEFAULT_POINTS)
    v.add_argument("--seed", type=int, default=DEFAULT_SEED)
    v.add_argument("--tol-jet", type=float, default=TOL_JET)
    v.add_argument("--tol-fd", type=float, default=TOL_FD)
    v.add_argument("--tol-algebra", type=float, default=TOL_ALGEBRA)
    v.add_argument("--fd-step", type=float, default=FD_STEP)
    v.add_argument("--fd-points", type=int, default=FD_POINTS, help="points that also run finite-difference checks")
    v.add_argument("--fd", action="store_true", help="also check Sparling with finite-difference d*S")
    v.add_argument("--vacuum", action="store_true", help="also require Ricci = 0")
    v.add_argument("--algebra-cases", type=int, default=1000)
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("tensors", parents=[common], help="dump all computed objects at one point")
    metric_args(t)
    t.add_argument("--point", required=True, help="four comma-separated coordinates")
    t.set_defaults(func=cmd_tensors)

    m = sub.add_parser("mass", parents=[common], help="surface-integral mass extrapolated in 1/r")
    metric_args(m)
    m.add_argument("--kind", default="einstein", help="einstein, ll (landau_lifshitz), raw_S or diagonal")
    m.add_argument("--radii", default="100,1000,10000")
    m.add_argument("--nodes", default="64x128", help="theta x phi quadrature nodes")
    m.add_argument("--degree", type=int, default=MASS_FIT_DEGREE, help="polynomial degree in 1/r")
    m.set_defaults(func=cmd_mass)

    c = sub.add_parser("catalog", parents=[common], help="list built-in metrics, or print one in canonical form")
    c.add_argument("name", nargs="?")
    c.set_defaults(func=cmd_catalog)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.log_level:
        try:
            logger.setLevel(args.log_level.upper())
        except ValueError:
            parser.error(f"unknown --log-level {args.log_level!r}")
    if args.threads < 1:
        parser.error("--threads must be at least 1")

    try:
        return args.func(args)
    except MetricSyntaxError as e:
        sys.stderr.write(f"{e}\n")
        return EXIT_PARSE
    except MassPreconditionError as e:
        sys.stderr.write(f"precondition: {e}\n")
        return EXIT_PRECONDITION
    except (EvaluationError, SignatureError, JetDomainError, np.linalg.LinAlgError) as e:
        sys.stderr.write(f"domain error: {e}\n")
        return EXIT_DOMAIN
    except (FileNotFoundError, ValueError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
