"""End-to-end check of a candidate point against the strong second-order
necessary conditions, with a strict gate for the contrapositive verdict."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np

from .config import RunConfig
from .efficiency import falsify_efficiency, falsify_geoffrion
from .firstorder import _frac_list, critical_cone, find_descent_direction, fritz_john, linearizing_cone, strong_fkkt
from .model import Problem, analyze_point
from .polyhedra import to_fractions
from .regularity import RegStatus, RegularityVerdict, check_direct, check_sufficient_asorc, check_sufficient_gasorc
from .secondorder import check_sskkt, find_lex_solution, second_linearizing_set, second_order_data
from .subdiff2 import Dd2Registry

SCHEMA = "vopt-kkt2/1"


class Classification(str, Enum):
    CONSISTENT = "Consistent"
    VIOLATED = "NecessaryConditionViolated"
    INDETERMINATE = "Indeterminate"


def combine_regularity(vacuous: bool, suff: RegularityVerdict, direct: RegularityVerdict | None) -> dict:
    """Vacuity, then the exact sufficient test, then the sampled check."""
    if vacuous:
        status = RegStatus.HOLDS_VACUOUSLY
    elif suff.status is RegStatus.HOLDS_BY_SUFFICIENCY:
        status = RegStatus.HOLDS_BY_SUFFICIENCY
    else:
        status = direct.status
    notes = []
    if direct is not None and status.definitive_holds and direct.status is RegStatus.COUNTEREXAMPLE:
        notes.append("sampled tangent test disagrees with the exact sufficient condition")
    return {
        "condition": suff.condition,
        "status": status.value,
        "sufficient": suff.to_json(),
        "direct": None if direct is None else direct.to_json(),
        "notes": notes,
    }


@dataclass
class DirectionRecord:
    u: tuple[Fraction, ...]
    critical: bool
    data: dict = field(default_factory=dict)
    gasorc: RegStatus | None = None
    asorc: RegStatus | None = None
    sskkt_found: bool = False
    sskkt_robust: bool = False


def _direction_record(P, pa, u, K, config, registry) -> DirectionRecord:
    sod = second_order_data(P, pa, u, config, registry)
    L2 = second_linearizing_set(sod)
    vacuous = L2.is_empty()
    regs = {}
    for cond, suff_fn in (("GASORC", check_sufficient_gasorc), ("ASORC", check_sufficient_asorc)):
        suff = suff_fn(sod)
        direct = None if vacuous else check_direct(P, pa, sod, cond, config=config)
        regs[cond] = combine_regularity(vacuous, suff, direct)
    sk = check_sskkt(sod)
    rec = DirectionRecord(
        u=sod.u,
        critical=K.cone.contains(sod.u),
        gasorc=RegStatus(regs["GASORC"]["status"]),
        asorc=RegStatus(regs["ASORC"]["status"]),
        sskkt_found=sk.found,
        sskkt_robust=sk.robust,
    )
    rec.data = {
        "u": _frac_list(sod.u),
        "critical": rec.critical,
        "second_order_data": sod.to_json(),
        "L2": L2.to_json(),
        "regularity": regs,
        "sskkt": sk.to_json(),
    }
    return rec


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("VOPT_THREADS", "1")))
    except ValueError:
        return 1


def auto_directions(K) -> list[tuple[Fraction, ...]]:
    zero = tuple(Fraction(0) for _ in range(K.cone.dim))
    return [zero] + [g for g in K.generators if g != zero]


def run_pipeline(P: Problem, x0, directions="auto", config: RunConfig | None = None,
                 registry: Dd2Registry | None = None) -> dict:
    """Full report as a JSON-ready dict (deterministic for a fixed config)."""
    config = config or RunConfig()
    registry = registry if registry is not None else Dd2Registry.from_overrides(P.overrides)
    pa = analyze_point(P, x0, config.tol.act)
    L = linearizing_cone(pa)
    K = critical_cone(pa)
    descent = find_descent_direction(pa)
    fj = fritz_john(pa)
    sf = strong_fkkt(pa)
    eff = falsify_efficiency(P, pa.x0, config.efficiency_budget)
    geo = falsify_geoffrion(P, pa.x0, config.mmax, config.efficiency_budget)

    if isinstance(directions, str):
        if directions.lower() != "auto":
            raise ValueError(f"directions must be 'auto' or a list, got {directions!r}")
        dirs = auto_directions(K)
    else:
        dirs = auto_directions(K)
        for d in directions:
            dq = to_fractions(d)
            if len(dq) != P.n:
                raise ValueError(f"direction must have {P.n} coordinates")
            if dq not in dirs:
                dirs.append(dq)

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        records = list(pool.map(lambda u: _direction_record(P, pa, u, K, config, registry), dirs))
    lex = find_lex_solution(P, pa, config, registry)

    classification, notes = classify(records, eff, geo, config, pa.feasible)
    return envelope("pipeline", P, config, {
        "point_analysis": pa.to_json(P),
        "linearizing_cone": L.to_json(),
        "critical_cone": K.to_json(),
        "descent_direction": None if descent is None else _frac_list(descent),
        "fritz_john": None if fj is None else fj.to_json(),
        "strong_fkkt": None if sf is None else sf.to_json(),
        "efficiency": {"efficiency": eff.to_json(), "geoffrion": geo.to_json()},
        "directions": [r.data for r in records],
        "lex_system_search": lex.to_json(),
        "classification": classification.value,
        "notes": notes,
    })


def envelope(command: str, P: Problem, config: RunConfig, result: dict) -> dict:
    return {
        "schema": SCHEMA,
        "command": command,
        "problem": {"name": P.name, "variables": list(P.variables), "n": P.n, "l": P.l, "m": P.m},
        "config": config.to_json(),
        "result": result,
    }


def classify(records, eff, geo, config: RunConfig, feasible: bool = True):
    notes = []
    if not feasible:
        return Classification.INDETERMINATE, ["the candidate point is infeasible"]
    proper_not_falsified = not eff.falsified and not geo.falsified
    if eff.falsified:
        notes.append("a dominating point was found: the point is not efficient, the necessary conditions do not apply")
    elif geo.falsified:
        notes.append("trade-off ratios grow without bound: the point is not properly efficient, the necessary conditions do not apply")

    def regularity_ok(r: DirectionRecord) -> bool:
        if r.gasorc.definitive_holds or r.asorc.definitive_holds:
            return True
        return config.soft_regularity and r.gasorc is RegStatus.SUPPORTED

    for r in records:
        u = [float(q) for q in r.u]
        if r.critical and not r.sskkt_found and r.sskkt_robust and regularity_ok(r) and proper_not_falsified:
            soft = not (r.gasorc.definitive_holds or r.asorc.definitive_holds)
            notes.append(
                f"regularity holds and the strong second-order KKT system has no solution for u={u}: "
                "the point cannot be properly efficient" + (" (regularity only sampled)" if soft else "")
            )
            return Classification.VIOLATED, notes
    failing = [r for r in records if not r.sskkt_found]
    if not failing:
        return Classification.CONSISTENT, notes + ["the strong second-order KKT system is solvable for every examined direction"]
    for r in failing:
        u = [float(q) for q in r.u]
        why = []
        if not r.critical:
            why.append("direction is not critical")
        if not regularity_ok(r):
            why.append(f"regularity status {r.gasorc.value}")
        if not r.sskkt_robust:
            why.append("verdict sensitive to the curvature margin")
        if not proper_not_falsified:
            why.append("proper efficiency falsified")
        notes.append(f"strong second-order KKT fails for u={u} but the gate is not met: {', '.join(why) or 'unspecified'}")
    return Classification.INDETERMINATE, notes


def direction_list(text: str, n: int) -> list[tuple[float, ...]]:
    """Parse 'a,b;c,d' into direction tuples."""
    out = []
    for part in text.split(";"):
        part = part.strip()
        if part:
            vals = tuple(float(s) for s in part.split(","))
            if len(vals) != n:
                raise ValueError(f"direction {part!r} must have {n} coordinates")
            out.append(vals)
    return out


def as_array(v) -> np.ndarray:
    return np.array([float(q) for q in v])
