"""Second-order regularity: exact sufficient conditions and sampled inclusion checks.

The generalized condition asks that the second-order linearizing set lies in
every second-order tangent set of the M^i; the plain condition uses the Q^i
instead.  Strict linear systems give exact sufficient conditions; the direct
check samples the linearizing set and calls the tangent tester.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np

from .config import RunConfig
from .firstorder import _frac_list
from .model import PointAnalysis, Problem, SetSpec
from .polyhedra import LinearSystem, Polyhedron, Rel, Row, dot, feasible, nullspace, to_fraction
from .secondorder import SecondOrderData, second_linearizing_set
from .tangent import TangentStatus, tangent2_membership

ZERO = Fraction(0)


class RegStatus(str, Enum):
    HOLDS_VACUOUSLY = "HoldsVacuously"
    HOLDS_BY_SUFFICIENCY = "HoldsBySufficiency"
    SUPPORTED = "Supported"
    COUNTEREXAMPLE = "Counterexample"
    UNKNOWN = "Unknown"

    @property
    def definitive_holds(self) -> bool:
        return self in (RegStatus.HOLDS_VACUOUSLY, RegStatus.HOLDS_BY_SUFFICIENCY)


@dataclass(frozen=True)
class RegularityVerdict:
    condition: str  # ASORC | GASORC | AFORC | GAFORC
    u: tuple[float, ...]
    status: RegStatus
    witnesses: dict = field(default_factory=dict)  # objective index -> v (sufficiency)
    samples: int = 0
    verified: int = 0
    inconclusive: int = 0
    counterexample: tuple[float, ...] | None = None
    counterexample_set: str | None = None
    trace: dict | None = None
    notes: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "condition": self.condition,
            "u": list(self.u),
            "status": self.status.value,
            "witnesses": {str(k + 1): _frac_list(v) for k, v in self.witnesses.items()},
            "samples": self.samples,
            "verified": self.verified,
            "inconclusive": self.inconclusive,
            "counterexample": None if self.counterexample is None else list(self.counterexample),
            "counterexample_set": self.counterexample_set,
            "trace": self.trace,
            "notes": list(self.notes),
        }


def condition_label(condition: str, u) -> str:
    """The u = 0 instances carry the first-order names."""
    condition = condition.upper()
    if condition not in ("ASORC", "GASORC"):
        raise ValueError(f"unknown regularity condition {condition!r}")
    if not any(u):
        return "AFORC" if condition == "ASORC" else "GAFORC"
    return condition


def _strict_system(sod: SecondOrderData, objective_rows) -> tuple[Fraction, ...] | None:
    """<a, v> + c < 0 for the chosen objectives and for J(x0; u), with inflated constants."""
    fc, gc = sod.f_curv(inflate=True), sod.g_curv(inflate=True)
    rows = [Row(sod.fq[k], Rel.LT, -fc[k]) for k in objective_rows]
    rows += [Row(sod.gq[j], Rel.LT, -gc[j]) for j in sod.support()]
    w = feasible(LinearSystem(sod.n, rows))
    if w is not None:
        assert all(r.satisfied_by(w) for r in rows)
    return w


def _sufficient(sod: SecondOrderData, condition: str, index_sets) -> RegularityVerdict:
    label = condition_label(condition, sod.u)
    u = tuple(float(q) for q in sod.u)
    witnesses = {}
    for i, ks in enumerate(index_sets):
        w = _strict_system(sod, ks)
        if w is None:
            return RegularityVerdict(label, u, RegStatus.UNKNOWN, witnesses,
                                     notes=(f"strict system for objective {i + 1} has no solution; the test is only sufficient",))
        witnesses[i] = w
    return RegularityVerdict(label, u, RegStatus.HOLDS_BY_SUFFICIENCY, witnesses)


def check_sufficient_gasorc(sod: SecondOrderData) -> RegularityVerdict:
    return _sufficient(sod, "GASORC", [[i] for i in range(sod.l)])


def check_sufficient_asorc(sod: SecondOrderData) -> RegularityVerdict:
    return _sufficient(sod, "ASORC", [[k for k in range(sod.l) if k != i] for i in range(sod.l)])


# ---------------------------------------------------------------------------
# Sampling the linearizing set


def _line_interval(poly: Polyhedron, p, d, cap: Fraction):
    lo, hi = -cap, cap
    for r in poly.rows:
        ad = dot(r.coeffs, d)
        slack = r.rhs - dot(r.coeffs, p)
        if ad == 0:
            continue
        bound = slack / ad
        if r.rel is Rel.EQ:
            lo = hi = bound  # cannot happen for d in the equality nullspace
        elif ad > 0:
            hi = min(hi, bound)
        else:
            lo = max(lo, bound)
    return lo, hi


def sample_polyhedron(poly: Polyhedron, count: int, seed: int = 0) -> list[tuple[Fraction, ...]]:
    """Exact rational points of a nonempty polyhedron.

    The first point is a relative-interior point; the rest come from
    hit-and-run moves inside the affine hull, including chord endpoints so
    that boundary points are represented.
    """
    p0 = poly.relative_interior_point()
    if p0 is None:
        return []
    out = [p0]
    implicit = set(poly.implicit_equalities())
    eq_rows = [r.coeffs for i, r in enumerate(poly.rows) if r.rel is Rel.EQ or i in implicit]
    basis = nullspace(eq_rows, poly.dim)
    if not basis:
        return out
    rng = np.random.default_rng(seed)
    cap = Fraction(1) + max(abs(c) for c in p0)
    p = p0
    k = 0
    while len(out) < count and k < 8 * count:
        k += 1
        coeffs = rng.integers(-3, 4, size=len(basis))
        if not coeffs.any():
            continue
        d = tuple(sum((int(c) * b[i] for c, b in zip(coeffs, basis)), ZERO) for i in range(poly.dim))
        lo, hi = _line_interval(poly, p, d, cap)
        if lo > hi:
            continue
        if k % 5 == 0:
            alpha = hi if k % 10 == 0 else lo
        else:
            frac = Fraction(int(rng.integers(1, 1000)), 1000)
            alpha = lo + frac * (hi - lo)
        q = tuple(a + alpha * b for a, b in zip(p, d))
        q = tuple(to_fraction(float(c)) if abs(c.denominator) > 10**6 else c for c in q)
        if poly.contains(q) and q not in out:
            out.append(q)
            p = q if k % 5 else p0
    return out


def _sets_for(condition: str, P: Problem, x0) -> list[SetSpec]:
    f0 = tuple(float(f.value(x0)) for f in P.objectives)
    x0t = tuple(float(v) for v in x0)
    kind = "M" if condition.upper() == "GASORC" else "Qi"
    return [SetSpec(kind, x0t, f0, i) for i in range(P.l)]


def check_direct(
    P: Problem,
    pa: PointAnalysis,
    sod: SecondOrderData,
    condition: str,
    n_samples: int | None = None,
    config: RunConfig | None = None,
) -> RegularityVerdict:
    config = config or RunConfig()
    n_samples = n_samples if n_samples is not None else config.regularity_samples
    label = condition_label(condition, sod.u)
    u = np.array([float(q) for q in sod.u])
    ut = tuple(u.tolist())
    L2 = second_linearizing_set(sod)
    notes = tuple(f"margin ambiguity on {name}" for name in L2.ambiguous)
    if L2.is_empty():
        return RegularityVerdict(label, ut, RegStatus.HOLDS_VACUOUSLY, notes=notes + ("second-order linearizing set is empty",))
    points = sample_polyhedron(L2.polyhedron, n_samples, config.seed)
    sets = _sets_for(condition, P, pa.x0)
    verified = inconclusive = 0
    for vq in points:
        v = np.array([float(c) for c in vq])
        for s in sets:
            verdict = tangent2_membership(P, s, pa.x0, u, v, config.tangent, config.tol)
            if verdict.status is TangentStatus.REFUTED:
                return RegularityVerdict(
                    label, ut, RegStatus.COUNTEREXAMPLE, samples=len(points), verified=verified,
                    inconclusive=inconclusive, counterexample=tuple(v.tolist()), counterexample_set=s.label,
                    trace=verdict.to_json(), notes=notes,
                )
            if verdict.status is TangentStatus.VERIFIED:
                verified += 1
            else:
                inconclusive += 1
    notes += ("inclusion not falsified on the sampled points; this is not a proof",)
    return RegularityVerdict(label, ut, RegStatus.SUPPORTED, samples=len(points), verified=verified,
                             inconclusive=inconclusive, notes=notes)


def check_regularity(P: Problem, pa: PointAnalysis, sod: SecondOrderData, condition: str,
                     config: RunConfig | None = None) -> RegularityVerdict:
    """Vacuity first, then the exact sufficient test, then the sampled check."""
    L2 = second_linearizing_set(sod)
    label = condition_label(condition, sod.u)
    if L2.is_empty():
        return RegularityVerdict(label, tuple(float(q) for q in sod.u), RegStatus.HOLDS_VACUOUSLY,
                                 notes=("second-order linearizing set is empty",))
    suff = check_sufficient_gasorc(sod) if condition.upper() == "GASORC" else check_sufficient_asorc(sod)
    if suff.status is RegStatus.HOLDS_BY_SUFFICIENCY:
        return suff
    return check_direct(P, pa, sod, condition, config=config)
