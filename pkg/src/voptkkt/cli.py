"""Command-line front end.

Exit codes: 0 when every reported status is definitive, 2 when an
Inconclusive, Unknown, Supported, Indeterminate or margin-sensitive status is
present, 1 on errors (bad input, parse failures, domain errors).
"""

from __future__ import annotations

import argparse
import sys

from . import expr as ex
from .config import Dd2Schedule, RunConfig, TangentSchedule, Tolerances
from .efficiency import falsify_efficiency, falsify_geoffrion
from .firstorder import _frac_list, critical_cone, find_descent_direction, fritz_john, linearizing_cone, strong_fkkt
from .model import ProblemError, analyze_point, load_problem, set_spec
from .pipeline import combine_regularity, direction_list, envelope, run_pipeline
from .polyhedra import DimensionLimitExceeded
from .regularity import check_direct, check_sufficient_asorc, check_sufficient_gasorc
from .report import dumps, render_text
from .secondorder import check_sskkt, second_linearizing_set, second_order_data
from .subdiff2 import Dd2Registry
from .tangent import tangent2_membership

OK, ERROR, UNDECIDED = 0, 1, 2
_UNDECIDED = {"Inconclusive", "Unknown", "Supported", "Indeterminate"}


def _vector(text: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("file", help="problem JSON file")
    p.add_argument("--point", type=_vector, required=True, help="candidate point, e.g. 0,0 (use --point=-1,0 for negatives)")
    p.add_argument("--json", action="store_true", help="emit the JSON report instead of text")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol-act", type=float, default=Tolerances.act)
    p.add_argument("--tol-dir", type=float, default=Tolerances.dir)
    p.add_argument("--tol-dd2", type=float, default=Tolerances.dd2)
    p.add_argument("--tol-t", type=float, default=Tolerances.tangent)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="voptkkt", description="Check strong second-order KKT conditions at a candidate point.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()
    sub.add_parser("analyze", parents=[common], help="point data, cones, descent system, multipliers")
    p = sub.add_parser("sskkt", parents=[common], help="strong second-order KKT system for one direction")
    p.add_argument("--dir", type=_vector, required=True)
    p = sub.add_parser("regularity", parents=[common], help="second-order regularity for one direction")
    p.add_argument("--dir", type=_vector, required=True)
    p.add_argument("--condition", choices=["asorc", "gasorc"], default="gasorc")
    p.add_argument("--samples", type=int, default=None)
    p = sub.add_parser("tangent", parents=[common], help="second-order tangent membership test")
    p.add_argument("--set", dest="set_label", required=True, help="Q0, Q, M<i> or Q<i>")
    p.add_argument("--dir", type=_vector, required=True)
    p.add_argument("--vec", type=_vector, required=True)
    p = sub.add_parser("falsify", parents=[common], help="search for dominance or unbounded trade-offs")
    p.add_argument("--geoffrion", action="store_true")
    p.add_argument("--mmax", type=float, default=1e3)
    p.add_argument("--budget", type=int, default=4096)
    p = sub.add_parser("pipeline", parents=[common], help="full report and classification")
    p.add_argument("--dirs", default="auto", help="'auto' or directions separated by ';', e.g. '1,0;0,1'")
    return parser


def _config(args) -> RunConfig:
    tol = Tolerances(act=args.tol_act, dir=args.tol_dir, dd2=args.tol_dd2, tangent=args.tol_t)
    return RunConfig(tol=tol, dd2=Dd2Schedule(), tangent=TangentSchedule(), seed=args.seed)


def _check_dim(P, v, what):
    if len(v) != P.n:
        raise ProblemError(f"{what} must have {P.n} coordinates, got {len(v)}")


def _run(args) -> tuple[dict, bool]:
    """Build the report; the flag says whether an undecided status is present."""
    P = load_problem(args.file)
    config = _config(args)
    _check_dim(P, args.point, "--point")
    registry = Dd2Registry.from_overrides(P.overrides)
    pa = analyze_point(P, args.point, config.tol.act)

    if args.command == "analyze":
        fj, sf, d = fritz_john(pa), strong_fkkt(pa), find_descent_direction(pa)
        result = {
            "point_analysis": pa.to_json(P),
            "linearizing_cone": linearizing_cone(pa).to_json(),
            "critical_cone": critical_cone(pa).to_json(),
            "descent_direction": None if d is None else _frac_list(d),
            "fritz_john": None if fj is None else fj.to_json(),
            "strong_fkkt": None if sf is None else sf.to_json(),
        }
        return envelope("analyze", P, config, result), not pa.feasible

    if args.command == "pipeline":
        dirs = "auto" if args.dirs.strip().lower() == "auto" else direction_list(args.dirs, P.n)
        report = run_pipeline(P, args.point, dirs, config, registry)
        return report, report["result"]["classification"] in _UNDECIDED

    if args.command in ("sskkt", "regularity", "tangent"):
        _check_dim(P, args.dir, "--dir")

    if args.command == "sskkt":
        sod = second_order_data(P, pa, args.dir, config, registry)
        sk = check_sskkt(sod)
        result = {"second_order_data": sod.to_json(), "sskkt": sk.to_json()}
        return envelope("sskkt", P, config, result), not sk.robust

    if args.command == "regularity":
        sod = second_order_data(P, pa, args.dir, config, registry)
        L2 = second_linearizing_set(sod)
        cond = args.condition.upper()
        suff = (check_sufficient_gasorc if cond == "GASORC" else check_sufficient_asorc)(sod)
        direct = None if L2.is_empty() else check_direct(P, pa, sod, cond, args.samples, config)
        entry = combine_regularity(L2.is_empty(), suff, direct)
        status = entry["status"]
        result = {"L2": L2.to_json(), "regularity": {cond: entry}}
        return envelope("regularity", P, config, result), status in _UNDECIDED

    if args.command == "tangent":
        _check_dim(P, args.vec, "--vec")
        spec = set_spec(P, args.set_label, args.point)
        verdict = tangent2_membership(P, spec, args.point, args.dir, args.vec, config.tangent, config.tol)
        return envelope("tangent", P, config, {"tangent_tests": verdict.to_json()}), verdict.status.value in _UNDECIDED

    if args.command == "falsify":
        eff = falsify_efficiency(P, pa.x0, args.budget)
        result = {"efficiency": eff.to_json()}
        if args.geoffrion:
            result["geoffrion"] = falsify_geoffrion(P, pa.x0, args.mmax, args.budget).to_json()
        return envelope("falsify", P, config, result), False

    raise ProblemError(f"unknown command {args.command}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return OK if e.code == 0 else ERROR
    try:
        report, undecided = _run(args)
    except (ProblemError, ex.ExpressionError, DimensionLimitExceeded, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return ERROR
    sys.stdout.write(dumps(report) if args.json else render_text(report))
    return UNDECIDED if undecided else OK


if __name__ == "__main__":
    sys.exit(main())
