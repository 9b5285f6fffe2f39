"""``texradon`` command line: gen, project, invert, verify.

Exit status: 0 success, 2 invalid parameters, 3 unreadable or
insufficient data, 4 numerical regression (calibration drift or a failed
verification check).
"""

import argparse
import math
import os
import sys

import numpy as np

from . import config
from .errors import (
    BandLimitError,
    CalibrationError,
    FormatError,
    ModelError,
    PropagationError,
    RankDeficiencyError,
)
from .goniometry import (
    OdfModel,
    default_grid,
    even_projector,
    format_matrix,
    make_odf,
    odf_checks,
    pole_figure,
    read_polefig,
    reconstruct_even,
    write_polefig,
)
from .harmonics import read_so3coef, write_so3coef
from .rotations import Rotation
from .verification import SUITES, run_suites

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

NONNEG_TOL = -1e-8
MASS_TOL = 1e-10


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# option parsing helpers


def _vector(text):
    try:
        v = np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise UsageError(f"expected three comma-separated numbers, got {text!r}")
    if v.size != 3 or not np.all(np.isfinite(v)):
        raise UsageError(f"expected three comma-separated numbers, got {text!r}")
    return v


def _direction(text):
    v = _vector(text)
    if np.linalg.norm(v) == 0:
        raise UsageError("direction must be nonzero")
    return v


def _directions(text):
    """Config-file form of ``--h``: whitespace-separated ``x,y,z`` triples."""
    return [_direction(t) for t in text.split()]


def _boolean(text):
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"expected a boolean, got {text!r}")


def _integer(text):
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"expected an integer, got {text!r}")


def _number(text):
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"expected a number, got {text!r}")


# (dest, converter for config values, default) per command
SHARED = [("threads", _integer, 1), ("L", _integer, 8)]
OPTIONS = {
    "gen": [
        ("model", str, "uniform"),
        ("center", _vector, np.zeros(3)),
        ("kappa", _number, 0.0),
        ("out", str, "odf.so3coef"),
    ],
    "project": [
        ("h", _directions, None),
        ("raw_radon", _boolean, False),
        ("ntheta", _integer, None),
        ("nphi", _integer, None),
        ("matrix", _boolean, False),
        ("plot", _boolean, False),
        ("out_dir", str, "."),
        ("prefix", str, "pf"),
    ],
    "invert": [
        ("method", str, "slice"),
        ("truth", str, None),
        ("out", str, "even.so3coef"),
        ("report", str, None),
        ("plot", str, None),
    ],
    "verify": [
        ("suite", str, "all"),
        ("seed", _integer, 7),
        ("report", str, None),
        ("plot", str, None),
    ],
}


def read_config(path):
    """Plain ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise FormatError("expected 'key = value'", path, lineno)
            key, value = (s.strip() for s in line.split("=", 1))
            values[key.replace("-", "_")] = value
    return values


def build_parser():
    parser = argparse.ArgumentParser(prog="texradon", description=__doc__.splitlines()[0].replace("``", ""))
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file; flags take precedence")
    common.add_argument("--threads", type=int, help="worker threads (default 1)")
    common.add_argument("--L", type=int, dest="L", help="band limit (default 8)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="write the coefficients of a model ODF")
    p.add_argument("--model", choices=["uniform", "unimodal"])
    p.add_argument("--center", type=_vector, help="ZYZ Euler angles a,b,c in radians")
    p.add_argument("--kappa", type=float, help="concentration (>= 0)")
    p.add_argument("-o", "--out", help="output coefficient file (default odf.so3coef)")

    p = sub.add_parser("project", parents=[common], help="sample pole figures of a coefficient file")
    p.add_argument("coef", help="so3coef input file")
    p.add_argument("--h", action="append", type=_direction, help="crystal direction x,y,z (repeatable)")
    p.add_argument("--raw-radon", action="store_const", const=True, help="emit Rf(h, r) instead of P f")
    p.add_argument("--ntheta", type=int, help="polar nodes (default L+1)")
    p.add_argument("--nphi", type=int, help="azimuthal nodes (default 2L+2)")
    p.add_argument("--matrix", action="store_const", const=True, help="also write a gnuplot matrix dump")
    p.add_argument("--plot", action="store_const", const=True, help="also render a PNG per pole figure")
    p.add_argument("--out-dir", help="output directory (default .)")
    p.add_argument("--prefix", help="output file prefix (default pf)")

    p = sub.add_parser("invert", parents=[common], help="recover even-degree coefficients")
    p.add_argument("polefigs", nargs="+", help="polefig input files")
    p.add_argument("--method", choices=["slice", "backprojection"])
    p.add_argument("--truth", help="so3coef file to compare against (even part)")
    p.add_argument("-o", "--out", help="output coefficient file (default even.so3coef)")
    p.add_argument("--report", help="report file (default stdout)")
    p.add_argument("--plot", help="PNG of per-degree block norms")

    p = sub.add_parser("verify", parents=[common], help="run seeded self-checks")
    p.add_argument("--suite", choices=sorted(SUITES) + ["all"])
    p.add_argument("--seed", type=int, help="random seed (default 7)")
    p.add_argument("--report", help="also write the check lines to this file")
    p.add_argument("--plot", help="PNG summary of the checks")
    return parser


def resolve(args):
    """Fill unset options from the config file, then from defaults."""
    file_values = read_config(args.config) if args.config else {}
    for dest, conv, default in SHARED + OPTIONS[args.command]:
        if getattr(args, dest, None) is not None:
            continue
        if dest in file_values:
            setattr(args, dest, conv(file_values[dest]))
        else:
            setattr(args, dest, default)
    return args


def validate(args):
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    config.check_bandlimit(args.L)
    if args.command == "gen":
        if args.model not in ("uniform", "unimodal"):
            raise UsageError(f"unknown model {args.model!r}")
        if not (math.isfinite(args.kappa) and args.kappa >= 0):
            raise UsageError("--kappa must be finite and nonnegative")
    elif args.command == "project":
        if not args.h:
            raise UsageError("at least one --h direction is required")
        for name in ("ntheta", "nphi"):
            v = getattr(args, name)
            if v is not None and v < 1:
                raise UsageError(f"--{name} must be >= 1")
    elif args.command == "invert":
        if args.method not in ("slice", "backprojection"):
            raise UsageError(f"unknown method {args.method!r}")
    elif args.command == "verify":
        if args.suite != "all" and args.suite not in SUITES:
            raise UsageError(f"unknown suite {args.suite!r}")
        if args.seed < 0:
            raise UsageError("--seed must be >= 0")


# ---------------------------------------------------------------------------
# commands


def cmd_gen(args, out):
    center = Rotation.from_euler(*args.center)
    model = OdfModel(args.model, center, args.kappa, args.L)
    write_so3coef(args.out, make_odf(model))
    c = read_so3coef(args.out)
    fmin, mass = odf_checks(c)
    ok_min = fmin >= NONNEG_TOL
    ok_mass = abs(mass - 1.0) <= MASS_TOL
    nnz = sum(1 for *_, v in c if v != 0)
    print(f"wrote {args.out} (L={c.L}, {nnz} nonzero coefficients)", file=out)
    print(f"nonnegativity {'PASS' if ok_min else 'FAIL'} min={fmin:.6e} tolerance={NONNEG_TOL:g}", file=out)
    print(f"normalization {'PASS' if ok_mass else 'FAIL'} integral={mass:.15f} tolerance={MASS_TOL:g}", file=out)
    return EXIT_OK if ok_min and ok_mass else EXIT_NUMERIC


def cmd_project(args, out):
    c = read_so3coef(args.coef)
    config.check_bandlimit(c.L)
    grid, weights, shape = default_grid(c.L, args.ntheta, args.nphi)
    os.makedirs(args.out_dir, exist_ok=True)
    for i, h in enumerate(args.h):
        pf = pole_figure(c, h, grid, raw=args.raw_radon, weights=weights, shape=shape)
        stem = os.path.join(args.out_dir, f"{args.prefix}{i:02d}")
        write_polefig(stem + ".polefig", pf)
        if args.matrix:
            with open(stem + ".matrix", "w") as fh:
                fh.write(format_matrix(pf))
        if args.plot:
            from .plotting import plot_pole_figure

            plot_pole_figure(pf, stem + ".png")
        k = int(np.argmax(pf.values))
        theta, phi = pf.angles
        x, y, z = pf.grid[k]
        hx, hy, hz = pf.h
        print(
            f"{stem}.polefig h={hx:.6f},{hy:.6f},{hz:.6f} "
            f"max={pf.values[k]:.12g} at theta={theta[k]:.6f} phi={phi[k]:.6f} "
            f"r={x:.6f},{y:.6f},{z:.6f} min={pf.values.min():.12g}",
            file=out,
        )
    return EXIT_OK


def invert_report(rec, L, truth=None):
    lines = [
        f"method {rec.method}",
        f"bandlimit {L}",
        f"unknowns {rec.unknowns}",
        f"condition {rec.condition:.6e}",
    ]
    for res in rec.residuals:
        h = ",".join(f"{v:.6f}" for v in res["h"])
        lines.append(f"residual h={h} max={res['max']:.3e} rms={res['rms']:.3e}")
    if truth is not None:
        target = even_projector(truth.resized(L))
        diff = rec.coeffs - target
        lines.append(f"truth_max_error {diff.max_abs():.3e}")
        for l in range(0, L + 1, 2):
            lines.append(f"truth_degree {l} max_error {float(np.max(np.abs(diff.blocks[l]))):.3e}")
    return "\n".join(lines) + "\n"


def cmd_invert(args, out):
    pfs = [read_polefig(p) for p in args.polefigs]
    truth = read_so3coef(args.truth) if args.truth else None
    rec = reconstruct_even(pfs, args.L, method=args.method)
    write_so3coef(args.out, rec.coeffs)
    report = invert_report(rec, args.L, truth)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(report)
    else:
        out.write(report)
    if args.plot:
        from .plotting import plot_degree_energy

        plot_degree_energy(rec.coeffs, args.plot, even_projector(truth) if truth else None)
    return EXIT_OK


def cmd_verify(args, out):
    names = sorted(SUITES) if args.suite == "all" else [args.suite]
    checks = run_suites(names, L=args.L, seed=args.seed)
    text = "\n".join(c.line() for c in checks) + "\n"
    out.write(text)
    failed = [c.name for c in checks if not c.passed]
    summary = f"# {len(checks) - len(failed)}/{len(checks)} checks passed (L={args.L}, seed={args.seed})"
    if failed:
        summary += "; failed: " + ", ".join(failed)
    print(summary, file=out)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(text)
    if args.plot:
        from .plotting import plot_checks

        plot_checks(checks, args.plot)
    return EXIT_NUMERIC if failed else EXIT_OK


COMMANDS = {"gen": cmd_gen, "project": cmd_project, "invert": cmd_invert, "verify": cmd_verify}


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags, 0 on --help
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        resolve(args)
        validate(args)
        config.set_threads(args.threads)
        return COMMANDS[args.command](args, out)
    except (FormatError, RankDeficiencyError, PropagationError, OSError) as exc:
        print(f"texradon: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except CalibrationError as exc:
        print(f"texradon: calibration drift: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, BandLimitError, ModelError, ValueError) as exc:
        print(f"texradon: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
