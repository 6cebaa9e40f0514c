"""Command line interface.

Subcommands::

    exp              endpoint of a random unit-speed geodesic
    log              shoot a geodesic of length --mu and recover it with the log map
    curvature        sectional curvature of a random or maximal-curvature plane
    jacobi-scan      conjugate points along a random or maximal-curvature geodesic
    verify-cutpoint  numerical checks of the explicit cut point on St(4, 2)
    experiment NAME  rank-scan, np-scan, mu-scan, maxcurv-scan or so2-scan

Exit status is 0 on success, 1 on usage errors and 2 on numerical failures.
Values from ``--config FILE`` (a JSON object keyed by long option names,
e.g. ``{"mu-min": 2.8, "trials": 50}``) are used unless overridden on the
command line.
"""

import argparse
import json
import sys

import numpy as np

from . import curvature, experiments, jacobi, logmap
from .errors import StiefelError
from .stiefel import (
    GeodesicSpec,
    StiefelPoint,
    exp_tangent,
    max_curvature_direction,
    max_curvature_pair,
    random_tangent,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _add_dims(parser, n=4, p=2):
    parser.add_argument("--n", type=int, default=n, help="ambient dimension")
    parser.add_argument("--p", type=int, default=p, help="number of columns")


def _add_common(parser):
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--config", help="JSON file with default option values")


def build_parser():
    parser = _Parser(prog="stiefel-injrad", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    sp = sub.add_parser("exp", help="endpoint of a random unit geodesic")
    _add_dims(sp)
    _add_common(sp)
    sp.add_argument("--t", type=float, default=1.0, help="geodesic length")
    sp.add_argument("--max-curvature", action="store_true")

    sp = sub.add_parser("log", help="shoot a geodesic and recover it with the log map")
    _add_dims(sp)
    _add_common(sp)
    sp.add_argument("--mu", type=float, default=1.0, help="geodesic length")
    sp.add_argument("--max-curvature", action="store_true")
    sp.add_argument("--log-tol", type=float, default=logmap.DEFAULT_TOL)
    sp.add_argument("--log-max-iter", type=int, default=logmap.DEFAULT_MAX_ITER)

    sp = sub.add_parser("curvature", help="sectional curvature of a tangent plane")
    _add_dims(sp)
    _add_common(sp)
    sp.add_argument("--max-curvature", action="store_true")

    sp = sub.add_parser("jacobi-scan", help="conjugate points along a geodesic")
    _add_dims(sp)
    _add_common(sp)
    sp.add_argument("--t-max", type=float, default=4.6)
    sp.add_argument("--grid", type=int, default=jacobi.DEFAULT_GRID)
    sp.add_argument("--tol-rel", type=float, default=jacobi.DEFAULT_TOL_REL)
    sp.add_argument("--max-curvature", action="store_true")
    sp.add_argument("--out", help="CSV output path")

    sp = sub.add_parser("verify-cutpoint", help="checks of the explicit cut point")
    sp.add_argument("--grid", type=int, default=jacobi.DEFAULT_GRID)
    sp.add_argument("--config", help="JSON file with default option values")

    sp = sub.add_parser("experiment", help="run a cut-point experiment")
    sp.add_argument("name", choices=[e for e in experiments.EXPERIMENTS if e != "verify-cutpoint"])
    _add_common(sp)
    for dim in ("n", "p"):
        sp.add_argument(f"--{dim}", type=int, nargs="+", help=f"explicit {dim} values")
        sp.add_argument(f"--{dim}-min", type=int)
        sp.add_argument(f"--{dim}-max", type=int)
    sp.add_argument("--mu-min", type=float)
    sp.add_argument("--mu-max", type=float)
    sp.add_argument("--mu-step", type=float)
    sp.add_argument("--mu", type=float, nargs="*", help="explicit mu values (overrides the grid)")
    sp.add_argument("--rank", type=int)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--out", help="CSV output path")
    sp.add_argument("--max-curvature", action="store_true", default=None)
    sp.add_argument("--log-tol", type=float)
    sp.add_argument("--log-max-iter", type=int)
    sp.add_argument("--grid", type=int, help="alpha grid size of the so2 scan")
    sp.add_argument("--iterations", type=int, help="so2-scan iterations")
    sp.add_argument("--mu-start", type=float, help="so2-scan start length")
    return parser


def _apply_config(parser, argv):
    """Parse ``argv`` with defaults taken from the ``--config`` file, if any."""
    args = parser.parse_args(argv)
    path = getattr(args, "config", None)
    if not path:
        return args
    try:
        with open(path, encoding="utf-8") as fh:
            values = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(values, dict):
        raise UsageError("config file must hold a JSON object")
    known = vars(args)
    defaults = {}
    for key, value in values.items():
        dest = key.replace("-", "_")
        if dest not in known or dest in ("command", "config", "name"):
            raise UsageError(f"unknown config key {key!r}")
        defaults[dest] = value
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def _matrix_csv(M):
    return "\n".join(",".join(experiments.fmt(x) for x in row) for row in np.atleast_2d(M))


def _direction(args, base, rng):
    if args.max_curvature:
        return max_curvature_direction(base)
    return random_tangent(base, rng)


def _cmd_exp(args):
    base = StiefelPoint.standard(args.n, args.p)
    rng = np.random.default_rng(args.seed)
    direction = _direction(args, base, rng)
    end = exp_tangent(direction * args.t)
    print(_matrix_csv(end.U))
    print(f"# Exp of a unit tangent at [I_{args.p}; 0] on St({args.n},{args.p}), t = {args.t:g}")
    return EXIT_OK


def _cmd_log(args):
    base = StiefelPoint.standard(args.n, args.p)
    rng = np.random.default_rng(args.seed)
    direction = _direction(args, base, rng)
    end = exp_tangent(direction * args.mu)
    result = logmap.stiefel_log(base, end, tol=args.log_tol, max_iter=args.log_max_iter)
    back = exp_tangent(result.tangent)
    print("mu,recovered_length,iterations,residual,exp_residual")
    print(",".join([
        experiments.fmt(args.mu),
        experiments.fmt(result.length),
        str(result.iterations),
        experiments.fmt(result.residual),
        experiments.fmt(np.linalg.norm(back.U - end.U)),
    ]))
    verdict = "shorter geodesic found" if result.length < args.mu - experiments.CUT_MARGIN else "no shorter geodesic"
    print(f"# {verdict} after {result.iterations} iterations")
    return EXIT_OK


def _cmd_curvature(args):
    base = StiefelPoint.standard(args.n, args.p)
    if args.max_curvature:
        d1, d2 = max_curvature_pair(base)
    else:
        rng = np.random.default_rng(args.seed)
        d1, d2 = random_tangent(base, rng), random_tangent(base, rng)
    K = curvature.sectional_curvature(d1, d2)
    print(f"sectional_curvature\n{experiments.fmt(K)}")
    print(f"# bound {curvature.MAX_SECTIONAL_CURVATURE:g}")
    return EXIT_OK


def _cmd_jacobi_scan(args):
    base = StiefelPoint.standard(args.n, args.p)
    rng = np.random.default_rng(args.seed)
    spec = GeodesicSpec(base, _direction(args, base, rng), args.t_max)
    hits = jacobi.conjugate_scan(spec, args.t_max, grid=args.grid, tol_rel=args.tol_rel)
    rows = [[experiments.fmt(t), str(m)] for t, m in hits]
    text = experiments._write_csv(args.out, ["t", "multiplicity"], rows)
    sys.stdout.write(text)
    first = f"{hits[0][0]:.10f}" if hits else "none"
    print(f"# {len(hits)} conjugate point(s) in (0, {args.t_max:g}]; first: {first}")
    return EXIT_OK


def _cmd_verify(args):
    report = jacobi.verify_explicit_cutpoint(grid=args.grid)
    for line in report.lines():
        print(line)
    return EXIT_OK if report.passed else EXIT_NUMERICAL


def _values(args, dim):
    explicit = getattr(args, dim)
    lo = getattr(args, f"{dim}_min")
    hi = getattr(args, f"{dim}_max")
    if explicit:
        if lo is not None or hi is not None:
            raise UsageError(f"--{dim} cannot be combined with --{dim}-min/--{dim}-max")
        return tuple(explicit)
    if lo is None and hi is None:
        return None
    if lo is None or hi is None:
        raise UsageError(f"--{dim}-min and --{dim}-max must be given together")
    if lo > hi:
        raise UsageError(f"--{dim}-min exceeds --{dim}-max")
    return tuple(range(lo, hi + 1))


def experiment_config(args):
    """Build an :class:`ExperimentConfig` from parsed ``experiment`` arguments."""
    overrides = {
        "n_values": _values(args, "n"),
        "p_values": _values(args, "p"),
        "mu_min": args.mu_min,
        "mu_max": args.mu_max,
        "mu_step": args.mu_step,
        "mu_values": args.mu,
        "trials_per_cell": args.trials,
        "seed": args.seed,
        "out_path": args.out,
        "log_tol": args.log_tol,
        "log_max_iter": args.log_max_iter,
        "rank": args.rank,
        "max_curvature": args.max_curvature,
        "grid": args.grid,
        "so2_iterations": args.iterations,
        "so2_mu_start": args.mu_start,
    }
    if args.name == "so2-scan" and overrides["p_values"] is None:
        overrides["p_values"] = (2,)
    if args.name == "so2-scan" and overrides["n_values"] is None:
        overrides["n_values"] = (4,)
    kwargs = {k: v for k, v in overrides.items() if v is not None}
    try:
        return experiments.ExperimentConfig(experiment_name=args.name, **kwargs)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _cmd_experiment(args):
    cfg = experiment_config(args)
    result = experiments.run_experiment(cfg)
    if cfg.out_path:
        print(f"# CSV written to {cfg.out_path}")
    print(result.summary)
    for n, p, rank_j, reason in getattr(result, "skipped_cells", []):
        rank = "" if rank_j is None else f", rank {rank_j}"
        print(f"# skipped n={n}, p={p}{rank}: {reason}")
    return EXIT_OK


COMMANDS = {
    "exp": _cmd_exp,
    "log": _cmd_log,
    "curvature": _cmd_curvature,
    "jacobi-scan": _cmd_jacobi_scan,
    "verify-cutpoint": _cmd_verify,
    "experiment": _cmd_experiment,
}


def cli_main(argv=None):
    """Run the CLI on ``argv`` (defaults to ``sys.argv[1:]``) and return the exit code."""
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    if not argv:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        args = _apply_config(parser, argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    except StiefelError as exc:
        if isinstance(exc, ValueError):  # invalid dimensions or ranks
            print(f"usage error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(cli_main())
