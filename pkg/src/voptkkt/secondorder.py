"""Second-order lexicographic data, the second-order linearizing set, SSKKT and
the search for solutions (u, v) of the strict lexicographic system."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from .config import RunConfig
from .firstorder import (
    MultiplierCertificate,
    _frac_list,
    _stationarity,
    critical_cone,
    find_descent_direction,
    solve_multipliers,
)
from .model import PointAnalysis, Problem
from .polyhedra import LexPair, LinearSystem, Polyhedron, Rel, Row, dot, feasible, lex_leq, lex_lt, to_fraction, to_fractions
from .subdiff2 import Dd2Estimate, Dd2Registry, Source, upper_dd2

ZERO = Fraction(0)


@dataclass(frozen=True)
class SecondOrderData:
    u: tuple[Fraction, ...]
    fq: tuple[tuple[Fraction, ...], ...]
    gq: tuple[tuple[Fraction, ...], ...]
    active: tuple[int, ...]
    f_first: tuple[Fraction, ...]
    g_first: tuple[Fraction, ...]  # zero for inactive constraints (never used)
    f_est: tuple[Dd2Estimate, ...]
    g_est: tuple[Dd2Estimate | None, ...]  # None for inactive constraints
    band: float  # first components within +-band count as zero
    margin: float  # delta_dd2 added to sampled constants for robustness checks
    f_names: tuple[str, ...] = ()
    g_names: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return len(self.u)

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.fq)

    def f_curv(self, inflate: bool = False) -> tuple[Fraction, ...]:
        return tuple(_const(e, self.margin if inflate else 0.0) for e in self.f_est)

    def g_curv(self, inflate: bool = False) -> tuple[Fraction, ...]:
        return tuple(ZERO if e is None else _const(e, self.margin if inflate else 0.0) for e in self.g_est)

    def support(self) -> tuple[int, ...]:
        """J(x0; u): active constraints whose first component is zero (within the band)."""
        return tuple(j for j in self.active if abs(float(self.g_first[j])) <= self.band)

    def F2(self, v) -> list[LexPair]:
        v = to_fractions(v)
        c = self.f_curv()
        return [LexPair(self.f_first[i], dot(self.fq[i], v) + c[i]) for i in range(self.l)]

    def G2(self, v) -> list[LexPair]:
        v = to_fractions(v)
        c = self.g_curv()
        return [LexPair(self.g_first[j], dot(self.gq[j], v) + c[j]) for j in self.active]

    def to_json(self) -> dict:
        def pair_json(name, a, first, est):
            return {
                "name": name,
                "first": float(first),
                "gradient": [float(q) for q in a],
                "curvature": est.to_json(),
            }

        return {
            "u": [float(q) for q in self.u],
            "F2": [pair_json(self.f_names[i], self.fq[i], self.f_first[i], self.f_est[i]) for i in range(self.l)],
            "G2": [pair_json(self.g_names[j], self.gq[j], self.g_first[j], self.g_est[j]) for j in self.active],
            "direction_active_set": [self.g_names[j] for j in self.support()],
            "band": self.band,
            "margin": self.margin,
        }


def _const(e: Dd2Estimate, margin: float) -> Fraction:
    bump = margin if e.source is Source.SAMPLED else 0.0
    return to_fraction(e.upper + bump)


def second_order_data(
    P: Problem,
    pa: PointAnalysis,
    u,
    config: RunConfig | None = None,
    registry: Dd2Registry | None = None,
) -> SecondOrderData:
    config = config or RunConfig()
    registry = registry if registry is not None else Dd2Registry.from_overrides(P.overrides)
    uq = to_fractions(u)
    uf = np.array([float(q) for q in uq])
    fq = tuple(pa.f_grads_q())
    gq = tuple(pa.g_grads_q())
    tol = config.tol

    def est(fn):
        return upper_dd2(fn.expr, pa.x0, uf, config.dd2, fn_id=fn.name, registry=registry, tol_dd2=tol.dd2)

    f_est = tuple(est(f) for f in P.objectives)
    g_est = tuple(est(P.constraints[j]) if j in pa.active else None for j in range(P.m))
    unorm = float(np.linalg.norm(uf))
    return SecondOrderData(
        u=uq,
        fq=fq,
        gq=gq,
        active=pa.active,
        f_first=tuple(dot(a, uq) for a in fq),
        g_first=tuple(dot(a, uq) for a in gq),
        f_est=f_est,
        g_est=g_est,
        band=tol.dd2 * (1.0 + unorm) if unorm > 0 else 0.0,
        margin=tol.dd2,
        f_names=tuple(f.name for f in P.objectives),
        g_names=tuple(g.name for g in P.constraints),
    )


# ---------------------------------------------------------------------------
# Second-order linearizing set


@dataclass(frozen=True)
class L2Set:
    polyhedron: Polyhedron
    empty_by_first_component: tuple[str, ...] = ()  # names whose first component is > 0
    ambiguous: tuple[str, ...] = ()  # first components inside the margin band but nonzero

    def is_empty(self) -> bool:
        return self.polyhedron.is_empty()

    def to_json(self) -> dict:
        pt = None if self.is_empty() else self.polyhedron.point()
        return {
            "rows": self.polyhedron.to_json(),
            "empty": self.is_empty(),
            "positive_first_components": list(self.empty_by_first_component),
            "margin_ambiguity": list(self.ambiguous),
            "point": None if pt is None else _frac_list(pt),
        }


def _lex_rows(sod: SecondOrderData):
    """Yield (name, gradient, first, curvature) over objectives and active constraints."""
    fc, gc = sod.f_curv(), sod.g_curv()
    for i in range(sod.l):
        yield sod.f_names[i] if sod.f_names else f"f{i + 1}", sod.fq[i], sod.f_first[i], fc[i]
    for j in sod.active:
        yield sod.g_names[j] if sod.g_names else f"g{j + 1}", sod.gq[j], sod.g_first[j], gc[j]


def second_linearizing_set(sod: SecondOrderData) -> L2Set:
    rows, positive, ambiguous = [], [], []
    for name, a, first, c in _lex_rows(sod):
        f = float(first)
        if f > sod.band:
            positive.append(name)
        elif f < -sod.band:
            continue
        else:
            if first != 0:
                ambiguous.append(name)
            rows.append(Row(a, Rel.LE, -c))
    if positive:
        return L2Set(Polyhedron.empty_set(sod.n), tuple(positive), tuple(ambiguous))
    return L2Set(Polyhedron(sod.n, rows), (), tuple(ambiguous))


# ---------------------------------------------------------------------------
# SSKKT


@dataclass(frozen=True)
class SskktResult:
    found: bool
    certificate: MultiplierCertificate | None
    robust: bool
    direction_active_set: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "status": "Found" if self.found else "NotFound",
            "certificate": None if self.certificate is None else self.certificate.to_json(),
            "robust": self.robust,
        }


def _sskkt_solve(sod: SecondOrderData, inflate: bool):
    supp = sod.support()
    return solve_multipliers(
        sod.fq, sod.gq, supp, lam_positive=True, curv_f=sod.f_curv(inflate), curv_g=sod.g_curv(inflate)
    )


def check_sskkt(sod: SecondOrderData) -> SskktResult:
    supp = sod.support()
    sol = _sskkt_solve(sod, inflate=False)
    if sol is None:
        # a larger true curvature could still admit multipliers
        robust = _sskkt_solve(sod, inflate=True) is None
        return SskktResult(False, None, robust, supp)
    lam, mu = sol
    m = min(lam)
    lam = tuple(v / m for v in lam)
    mu = tuple(v / m for v in mu)
    fc, gc = sod.f_curv(), sod.g_curv()
    curv = sum((lam[i] * fc[i] for i in range(sod.l)), ZERO) + sum((mu[j] * gc[j] for j in supp), ZERO)
    st = _stationarity(sod.fq, sod.gq, lam, mu)
    assert all(v == 0 for v in st) and curv >= 0
    fi, gi = sod.f_curv(True), sod.g_curv(True)
    curv_inflated = sum((lam[i] * fi[i] for i in range(sod.l)), ZERO) + sum((mu[j] * gi[j] for j in supp), ZERO)
    cert = MultiplierCertificate(
        "SSKKT", lam, mu, st, curv, robust=curv_inflated >= 0,
        extra={"u": [float(q) for q in sod.u]},
    )
    return SskktResult(True, cert, cert.robust, supp)


# ---------------------------------------------------------------------------
# Strict lexicographic system in (u, v)


@dataclass(frozen=True)
class LexSystemSearch:
    found: bool
    u: tuple[Fraction, ...] | None = None
    v: tuple[Fraction, ...] | None = None
    strict_index: int | None = None  # 0-based objective index
    searched: tuple[tuple[float, ...], ...] = ()
    exhaustive: bool = False
    notes: tuple[str, ...] = field(default_factory=tuple)

    def to_json(self) -> dict:
        return {
            "status": "Found" if self.found else "NoneFound",
            "u": None if self.u is None else _frac_list(self.u),
            "v": None if self.v is None else _frac_list(self.v),
            "strict_index": None if self.strict_index is None else self.strict_index + 1,
            "searched_directions": [list(d) for d in self.searched],
            "exhaustive": self.exhaustive,
            "notes": list(self.notes),
        }


def solve_lex_system(sod: SecondOrderData) -> tuple[tuple[Fraction, ...], int] | None:
    """For fixed u, find v with all pairs <=_lex 0 and some objective pair <_lex 0."""
    L2 = second_linearizing_set(sod)
    if L2.empty_by_first_component:
        return None
    base = L2.polyhedron.rows
    fc = sod.f_curv()
    for i in range(sod.l):
        first = float(sod.f_first[i])
        if first < -sod.band:
            w = feasible(LinearSystem(sod.n, list(base)))
        else:
            w = feasible(LinearSystem(sod.n, list(base) + [Row(sod.fq[i], Rel.LT, -fc[i])]))
        if w is not None:
            return w, i
    return None


def verify_lex_solution(sod: SecondOrderData, v, i: int) -> bool:
    zero = LexPair(ZERO, ZERO)

    def snap(p: LexPair) -> LexPair:
        return LexPair(ZERO, p.second) if abs(float(p.first)) <= sod.band else p

    F = [snap(p) for p in sod.F2(v)]
    G = [snap(p) for p in sod.G2(v)]
    return all(lex_leq(p, zero) for p in F) and all(lex_leq(p, zero) for p in G) and lex_lt(F[i], zero)


def candidate_directions(pa: PointAnalysis) -> list[tuple[Fraction, ...]]:
    K = critical_cone(pa)
    zero = tuple(ZERO for _ in range(pa.n))
    out = [zero] + list(K.generators)
    for a, b in combinations(K.generators, 2):
        s = tuple(x + y for x, y in zip(a, b))
        if any(s) and s not in out:
            out.append(s)
    d = find_descent_direction(pa)
    if d is not None and d not in out:
        out.append(d)
    return out


def find_lex_solution(
    P: Problem,
    pa: PointAnalysis,
    config: RunConfig | None = None,
    registry: Dd2Registry | None = None,
    directions=None,
) -> LexSystemSearch:
    """Search for (u, v) solving the strict lexicographic system over candidate u.

    The answer NoneFound is a complete decision only when the linearizing
    cone is {0} (trivial critical cone and no descent direction), since then
    u = 0 is the only candidate; otherwise it records the finite candidate
    set that was tried.
    """
    config = config or RunConfig()
    dirs = directions if directions is not None else candidate_directions(pa)
    exhaustive = directions is None and critical_cone(pa).is_trivial and find_descent_direction(pa) is None
    searched = []
    for u in dirs:
        sod = second_order_data(P, pa, u, config, registry)
        searched.append(tuple(float(q) for q in sod.u))
        hit = solve_lex_system(sod)
        if hit is not None:
            v, i = hit
            assert verify_lex_solution(sod, v, i)
            return LexSystemSearch(True, sod.u, v, i, tuple(searched), exhaustive)
    notes = () if exhaustive else ("finite candidate search; absence of a solution is evidence, not proof",)
    return LexSystemSearch(False, None, None, None, tuple(searched), exhaustive, notes)
