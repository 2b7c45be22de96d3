"""Command-line interface: ``scifuse {fuse,pertinence,sweep,verify,ellipses}``.

Exit codes: 0 success, 1 computational error, 2 input or validation error.
Errors are reported as a JSON object on stderr.
"""
import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import __version__
from .errors import SciFuseError, ScenarioError
from .fusion import JointCorrelation, directional_stats, mse_under_correlation, sci_gain
from .omega import optimal_sci_filter
from .oracle import SeededRng, check_consistency, sample_admissible_joints
from .pertinence import (
    CostObjective,
    CostParams,
    cost_det,
    cost_trace,
    det_pertinent,
    necessary_condition,
    trace_pertinent,
)
from .psd import ellipse_boundary
from .scenario import load_scenario, measurement_for, run_fusion, swap_roles

SEED_ENV = "SCI_FUSE_SEED"
SWEEP_END = 1.0 - 1e-6


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _u64(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an unsigned integer, got {text!r}")
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _omega(text):
    if text == "star":
        return text
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--omega takes 'star' or a number, got {text!r}")
    if not 0.0 <= value < 1.0:
        raise argparse.ArgumentTypeError("--omega must lie in [0, 1)")
    return value


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("scenario", help="scenario JSON file")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--seed", type=_u64, help=f"RNG seed (overrides ${SEED_ENV} and the file)")
    common.add_argument("--jobs", type=_positive_int, default=1, help="worker threads")
    common.add_argument("--swap", action="store_true", help="let agent B fuse instead of A")

    parser = _Parser(prog="scifuse", description="Split Covariance Intersection range fusion")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fuse", parents=[common], help="run the optimal SCI update")
    p.add_argument("--objective", choices=("trace", "det"))
    p.add_argument("--samples", type=_positive_int, default=1000,
                   help="joints sampled for the consistency summary")

    sub.add_parser("pertinence", parents=[common], help="closed-form pertinence verdicts")

    p = sub.add_parser("sweep", parents=[common], help="trace and det cost over omega (CSV)")
    p.add_argument("--points", type=_positive_int, default=101)

    p = sub.add_parser("verify", parents=[common], help="randomized consistency check")
    p.add_argument("--samples", type=_positive_int, default=1000)
    p.add_argument("--omega", type=_omega, default="star")
    p.add_argument("--objective", choices=("trace", "det"))

    p = sub.add_parser("ellipses", parents=[common], help="ellipse polylines (CSV)")
    p.add_argument("--points", type=_positive_int, default=100)
    p.add_argument("--samples", type=_positive_int, default=50)
    p.add_argument("--objective", choices=("trace", "det"))
    return parser


def _resolve_seed(args, scn):
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return _u64(env)
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"${SEED_ENV}: {exc}")
    return scn.seed


def _scenario(args):
    scn = load_scenario(args.scenario)
    return swap_roles(scn) if args.swap else scn


def _fmt(x):
    return repr(float(x))


def cmd_fuse(args):
    scn = _scenario(args)
    record = run_fusion(scn, args.objective, samples=args.samples, jobs=args.jobs,
                        seed=_resolve_seed(args, scn))
    return record.to_json() + "\n"


def cmd_pertinence(args):
    scn = _scenario(args)
    meas = measurement_for(scn)
    stats = directional_stats(scn.est_a.cov, scn.est_b.cov, meas.direction)
    out = {
        "necessary": necessary_condition(stats),
        "trace": trace_pertinent(stats),
        "det": det_pertinent(stats),
        "sigma_a2": stats.sigma_a2,
        "sigma_b2": stats.sigma_b2,
        "r_a": stats.r_a,
    }
    return json.dumps(out, indent=2) + "\n"


def cmd_sweep(args):
    scn = _scenario(args)
    meas = measurement_for(scn)
    stats = directional_stats(scn.est_a.cov, scn.est_b.cov, meas.direction)
    params = CostParams(stats, scn.sigma_m2)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["omega", "g", "h"])
    for w in np.linspace(0.0, SWEEP_END, args.points):
        writer.writerow([_fmt(w), _fmt(cost_trace(w, params)), _fmt(cost_det(w, params))])
    return buf.getvalue()


def _objective(args, scn):
    return CostObjective.parse(args.objective or scn.objective)


def cmd_verify(args):
    scn = _scenario(args)
    meas = measurement_for(scn)
    if args.omega == "star":
        omega = optimal_sci_filter(scn.est_a, scn.est_b, meas, _objective(args, scn)).omega_star
    else:
        omega = args.omega
    report = check_consistency(scn.est_a, scn.est_b, meas, omega,
                               SeededRng(_resolve_seed(args, scn)), args.samples, jobs=args.jobs)
    return json.dumps(report.to_dict(), indent=2) + "\n"


def ellipse_rows(scn, objective, points, samples, seed):
    """Labeled polylines ``(label, index, x, y)`` for the two priors, the
    optimal SCI covariance and sampled true MSE ellipses around the fused mean."""
    if scn.dim != 2:
        raise ScenarioError("ellipse export needs a 2-D scenario", "dim")
    meas = measurement_for(scn)
    sol = optimal_sci_filter(scn.est_a, scn.est_b, meas, objective)
    stats = directional_stats(scn.est_a.cov, scn.est_b.cov, meas.direction)
    gain = sci_gain(scn.est_a.cov, stats, meas.noise_var, meas.direction, sol.omega_star)
    pa_t, pb_t, cross = sample_admissible_joints(SeededRng(seed).stream(0),
                                                 scn.est_a.cov, scn.est_b.cov, samples)
    shapes = [("P_A", scn.est_a.cov, scn.est_a.mean, False),
              ("P_B", scn.est_b.cov, scn.est_b.mean, False),
              ("P_SCI_star", sol.fused_cov, sol.fused_mean, False)]
    for k in range(samples):
        mse = mse_under_correlation(JointCorrelation(pa_t[k], pb_t[k], cross[k]),
                                    gain, meas.direction, meas.noise_var)
        shapes.append((f"P_tilde_F_{k}", mse, sol.fused_mean, True))
    rows = []
    for label, cov, center, singular_ok in shapes:
        poly = ellipse_boundary(cov, center, points, allow_singular=singular_ok)
        rows.extend((label, i, x, y) for i, (x, y) in enumerate(poly.points))
    return rows


def cmd_ellipses(args):
    scn = _scenario(args)
    rows = ellipse_rows(scn, _objective(args, scn), args.points, args.samples,
                        _resolve_seed(args, scn))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["label", "index", "x", "y"])
    for label, i, x, y in rows:
        writer.writerow([label, i, _fmt(x), _fmt(y)])
    return buf.getvalue()


COMMANDS = {
    "fuse": cmd_fuse,
    "pertinence": cmd_pertinence,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "ellipses": cmd_ellipses,
}


def _fail(code, kind, message, field=None):
    err = {"error": kind, "message": message}
    if field is not None:
        err["field"] = field
    sys.stderr.write(json.dumps(err) + "\n")
    return code


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _fail(2, "usage", str(exc))
    try:
        text = COMMANDS[args.command](args)
    except UsageError as exc:
        return _fail(2, "usage", str(exc))
    except ScenarioError as exc:
        return _fail(2, "scenario", str(exc), exc.field)
    except OSError as exc:
        return _fail(2, "io", str(exc))
    except (SciFuseError, ValueError, np.linalg.LinAlgError) as exc:
        return _fail(1, type(exc).__name__, str(exc))
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
