"""Exact rational linear systems.

Feasibility of mixed ``=``, ``<=``, ``<`` systems is decided by Fourier-Motzkin
elimination over :class:`fractions.Fraction`. Strict rows stay strict through
elimination (a combination is strict when either parent is), so no epsilon is
ever introduced. Witnesses are recovered by back-substitution; at each step the
free coordinate is set to the admissible value closest to zero, which keeps
witnesses small and makes them reproducible.

Variables are eliminated from the last index to the first, so back-substitution
fixes coordinate 0 first. Callers that care about which multipliers come out as
zero order their unknowns accordingly.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

EXACT_DIM_LIMIT = 12
MAX_DENOMINATOR = 10**9


class DimensionLimitExceeded(ValueError):
    pass


class PointNotInSet(ValueError):
    pass


class DirectionNotTangent(ValueError):
    pass


class Rel(str, Enum):
    EQ = "EQ"
    LE = "LE"
    LT = "LT"


def to_fraction(x) -> Fraction:
    """Exact value for ints/Fractions/decimal strings; floats are rationalized
    by continued fractions with denominator <= 1e9."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x)
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot rationalize {x!r}")
    return Fraction(x).limit_denominator(MAX_DENOMINATOR)


def to_fractions(xs: Iterable) -> tuple[Fraction, ...]:
    return tuple(to_fraction(x) for x in xs)


def dot(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


# ---------------------------------------------------------------------------
# Lexicographic order on pairs


@dataclass(frozen=True)
class LexPair:
    first: float
    second: float

    def __iter__(self):
        return iter((self.first, self.second))


def lex_leq(a, b) -> bool:
    a1, a2 = a
    b1, b2 = b
    return a1 < b1 or (a1 == b1 and a2 <= b2)


def lex_lt(a, b) -> bool:
    a1, a2 = a
    b1, b2 = b
    return a1 < b1 or (a1 == b1 and a2 < b2)


# ---------------------------------------------------------------------------
# Linear systems


@dataclass(frozen=True)
class Row:
    coeffs: tuple[Fraction, ...]
    rel: Rel
    rhs: Fraction

    @classmethod
    def make(cls, coeffs, rel, rhs=0) -> "Row":
        return cls(to_fractions(coeffs), Rel(rel), to_fraction(rhs))

    def satisfied_by(self, x: Sequence[Fraction]) -> bool:
        lhs = dot(self.coeffs, x)
        if self.rel is Rel.EQ:
            return lhs == self.rhs
        if self.rel is Rel.LE:
            return lhs <= self.rhs
        return lhs < self.rhs

    def to_json(self) -> dict:
        return {
            "coeffs": [_frac_json(c) for c in self.coeffs],
            "rel": self.rel.value,
            "rhs": _frac_json(self.rhs),
        }

    @classmethod
    def from_json(cls, data: dict) -> "Row":
        return cls.make([_frac_from_json(c) for c in data["coeffs"]], data["rel"], _frac_from_json(data["rhs"]))


def _frac_json(q: Fraction):
    return q.numerator if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _frac_from_json(v):
    return Fraction(v) if isinstance(v, str) else to_fraction(v)


@dataclass
class LinearSystem:
    dim: int
    rows: list[Row] = field(default_factory=list)

    def __post_init__(self):
        for r in self.rows:
            if len(r.coeffs) != self.dim:
                raise ValueError(f"row has {len(r.coeffs)} coefficients, system dimension is {self.dim}")

    def add(self, coeffs, rel, rhs=0) -> "LinearSystem":
        row = Row.make(coeffs, rel, rhs)
        if len(row.coeffs) != self.dim:
            raise ValueError(f"row has {len(row.coeffs)} coefficients, system dimension is {self.dim}")
        self.rows.append(row)
        return self

    def extended(self, rows: Iterable[Row]) -> "LinearSystem":
        return LinearSystem(self.dim, list(self.rows) + list(rows))

    def satisfied_by(self, x) -> bool:
        x = to_fractions(x)
        return all(r.satisfied_by(x) for r in self.rows)

    def to_json(self) -> list[dict]:
        return [r.to_json() for r in self.rows]


# ---------------------------------------------------------------------------
# Fourier-Motzkin elimination


class _Contradiction(Exception):
    pass


def _normalize(row: Row) -> Row | None:
    """Scale to max |coeff| == 1; drop trivially true rows, raise on false ones."""
    scale = max((abs(c) for c in row.coeffs), default=Fraction(0))
    if scale == 0:
        ok = {
            Rel.EQ: row.rhs == 0,
            Rel.LE: row.rhs >= 0,
            Rel.LT: row.rhs > 0,
        }[row.rel]
        if not ok:
            raise _Contradiction
        return None
    coeffs = tuple(c / scale for c in row.coeffs)
    rhs = row.rhs / scale
    if row.rel is Rel.EQ:
        lead = next(c for c in coeffs if c != 0)
        if lead < 0:
            coeffs = tuple(-c for c in coeffs)
            rhs = -rhs
    return Row(coeffs, row.rel, rhs)


def _prune(rows: Iterable[Row]) -> list[Row]:
    """Normalize, drop duplicates and rows dominated by a parallel tighter row."""
    eqs: dict[tuple, Fraction] = {}
    ineqs: dict[tuple, tuple[Fraction, bool]] = {}
    for raw in rows:
        r = _normalize(raw)
        if r is None:
            continue
        if r.rel is Rel.EQ:
            prev = eqs.get(r.coeffs)
            if prev is not None and prev != r.rhs:
                raise _Contradiction
            eqs[r.coeffs] = r.rhs
        else:
            strict = r.rel is Rel.LT
            prev = ineqs.get(r.coeffs)
            if prev is None or r.rhs < prev[0] or (r.rhs == prev[0] and strict):
                ineqs[r.coeffs] = (r.rhs, strict)
    out = [Row(c, Rel.EQ, b) for c, b in eqs.items()]
    out += [Row(c, Rel.LT if s else Rel.LE, b) for c, (b, s) in ineqs.items()]
    # an inequality contradicting its opposite, e.g. a.x <= b and -a.x < -b
    for c, (b, s) in ineqs.items():
        neg = tuple(-x for x in c)
        if neg in ineqs:
            b2, s2 = ineqs[neg]
            # a.x <= b and a.x >= -b2
            if -b2 > b or (-b2 == b and (s or s2)):
                raise _Contradiction
    return out


def _substitute(row: Row, eq: Row, k: int) -> Row:
    a = row.coeffs[k]
    if a == 0:
        return row
    f = a / eq.coeffs[k]
    coeffs = tuple(c - f * e for c, e in zip(row.coeffs, eq.coeffs))
    return Row(coeffs, row.rel, row.rhs - f * eq.rhs)


def _combine(p: Row, n: Row, k: int) -> Row:
    # p has coeff > 0 on x_k, n has coeff < 0
    fp = 1 / p.coeffs[k]
    fn = 1 / -n.coeffs[k]
    coeffs = tuple(fp * a + fn * b for a, b in zip(p.coeffs, n.coeffs))
    rel = Rel.LT if (p.rel is Rel.LT or n.rel is Rel.LT) else Rel.LE
    return Row(coeffs, rel, fp * p.rhs + fn * n.rhs)


def _pick(lo, lo_strict, hi, hi_strict) -> Fraction:
    """Admissible value closest to zero, preferring integers."""

    def ok(x):
        above = lo is None or x > lo or (x == lo and not lo_strict)
        below = hi is None or x < hi or (x == hi and not hi_strict)
        return above and below

    if ok(Fraction(0)):
        return Fraction(0)
    if lo is not None and lo >= 0:
        c = lo if not lo_strict else Fraction(math.floor(lo) + 1)
        return c if ok(c) else (lo + hi) / 2
    c = hi if not hi_strict else Fraction(math.ceil(hi) - 1)
    return c if ok(c) else (lo + hi) / 2


def _solve(system: LinearSystem) -> tuple[Fraction, ...] | None:
    d = system.dim
    try:
        current = _prune(system.rows)
        stages = []
        for k in reversed(range(d)):
            eq = next((r for r in current if r.rel is Rel.EQ and r.coeffs[k] != 0), None)
            if eq is not None:
                stages.append(("sub", k, eq))
                current = [_substitute(r, eq, k) for r in current if r is not eq]
            else:
                pos = [r for r in current if r.coeffs[k] > 0]
                neg = [r for r in current if r.coeffs[k] < 0]
                rest = [r for r in current if r.coeffs[k] == 0]
                stages.append(("fm", k, pos + neg))
                current = rest + [_combine(p, q, k) for p in pos for q in neg]
            current = _prune(current)
    except _Contradiction:
        return None
    if current:
        raise AssertionError("elimination left non-constant rows")

    x: list[Fraction] = [Fraction(0)] * d
    for kind, k, payload in reversed(stages):
        if kind == "sub":
            eq = payload
            rest = sum((c * x[i] for i, c in enumerate(eq.coeffs) if i != k), Fraction(0))
            x[k] = (eq.rhs - rest) / eq.coeffs[k]
            continue
        lo = hi = None
        lo_strict = hi_strict = False
        for r in payload:
            a = r.coeffs[k]
            rest = sum((c * x[i] for i, c in enumerate(r.coeffs) if i != k), Fraction(0))
            bound = (r.rhs - rest) / a
            strict = r.rel is Rel.LT
            if a > 0:
                if hi is None or bound < hi or (bound == hi and strict):
                    hi, hi_strict = bound, strict
            else:
                if lo is None or bound > lo or (bound == lo and strict):
                    lo, lo_strict = bound, strict
        x[k] = _pick(lo, lo_strict, hi, hi_strict)
    witness = tuple(x)
    if not system.satisfied_by(witness):
        raise AssertionError("Fourier-Motzkin witness failed verification")
    return witness


def feasible(system: LinearSystem, exact: bool = True) -> tuple[Fraction, ...] | None:
    """Exact witness of ``system`` or None when it is infeasible.

    ``exact=False`` lifts the dimension limit by delegating to
    :func:`feasible_float`; an inconclusive float answer raises.
    """
    if system.dim > EXACT_DIM_LIMIT:
        if exact:
            raise DimensionLimitExceeded(
                f"exact elimination is limited to {EXACT_DIM_LIMIT} variables, got {system.dim}"
            )
        status, w = feasible_float(system)
        if status == "inconclusive":
            raise ValueError("float feasibility check was inconclusive")
        return None if w is None else to_fractions(w)
    return _solve(system)


def feasible_float(system: LinearSystem, slack_tol: float = 1e-9) -> tuple[str, np.ndarray | None]:
    """Max-slack LP fallback. Returns ("feasible"|"infeasible"|"inconclusive", x)."""
    from scipy.optimize import linprog

    d = system.dim
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for r in system.rows:
        a = [float(c) for c in r.coeffs]
        if r.rel is Rel.EQ:
            A_eq.append(a + [0.0])
            b_eq.append(float(r.rhs))
        else:
            A_ub.append(a + ([1.0] if r.rel is Rel.LT else [0.0]))
            b_ub.append(float(r.rhs))
    c = np.zeros(d + 1)
    c[-1] = -1.0
    bounds = [(None, None)] * d + [(None, 1.0)]
    res = linprog(
        c,
        A_ub=np.array(A_ub) if A_ub else None,
        b_ub=np.array(b_ub) if b_ub else None,
        A_eq=np.array(A_eq) if A_eq else None,
        b_eq=np.array(b_eq) if b_eq else None,
        bounds=bounds,
        method="highs",
    )
    if res.status == 2:
        return "infeasible", None
    if res.status != 0:
        return "inconclusive", None
    has_strict = any(r.rel is Rel.LT for r in system.rows)
    if has_strict and res.x[-1] <= slack_tol:
        return "inconclusive", res.x[:d]
    return "feasible", res.x[:d]


# ---------------------------------------------------------------------------
# Polyhedra


class Polyhedron:
    """``{x : rows}`` with ``=`` and ``<=`` rows only.

    The emptiness flag is computed once, under a lock; reads are safe from any
    thread.
    """

    def __init__(self, dim: int, rows: Iterable[Row] = ()):
        rows = list(rows)
        for r in rows:
            if r.rel is Rel.LT:
                raise ValueError("polyhedra are closed; strict rows are not allowed")
        self.system = LinearSystem(dim, rows)
        self._empty: bool | None = None
        self._lock = threading.Lock()

    @classmethod
    def full(cls, dim: int) -> "Polyhedron":
        return cls(dim, [])

    @classmethod
    def empty_set(cls, dim: int) -> "Polyhedron":
        return cls(dim, [Row((Fraction(0),) * dim, Rel.LE, Fraction(-1))])

    @property
    def dim(self) -> int:
        return self.system.dim

    @property
    def rows(self) -> list[Row]:
        return self.system.rows

    def is_empty(self) -> bool:
        if self._empty is None:
            with self._lock:
                if self._empty is None:
                    self._empty = feasible(self.system) is None
        return self._empty

    def point(self) -> tuple[Fraction, ...] | None:
        return feasible(self.system)

    def contains(self, x) -> bool:
        return self.system.satisfied_by(x)

    def subset_of(self, other: "Polyhedron") -> bool:
        """Exact inclusion ``self ⊆ other``."""
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        if self.is_empty():
            return True
        for r in other.rows:
            negated = [Row(tuple(-c for c in r.coeffs), Rel.LT, -r.rhs)]
            if r.rel is Rel.EQ:
                negated.append(Row(r.coeffs, Rel.LT, r.rhs))
            for bad in negated:
                if feasible(self.system.extended([bad])) is not None:
                    return False
        return True

    def equivalent(self, other: "Polyhedron") -> bool:
        return self.subset_of(other) and other.subset_of(self)

    def implicit_equalities(self) -> list[int]:
        """Indices of ``<=`` rows that hold with equality on the whole set."""
        out = []
        for i, r in enumerate(self.rows):
            if r.rel is Rel.LE:
                strict = Row(r.coeffs, Rel.LT, r.rhs)
                rows = self.rows[:i] + [strict] + self.rows[i + 1 :]
                if feasible(LinearSystem(self.dim, rows)) is None:
                    out.append(i)
        return out

    def relative_interior_point(self) -> tuple[Fraction, ...] | None:
        if self.is_empty():
            return None
        implicit = set(self.implicit_equalities())
        rows = []
        for i, r in enumerate(self.rows):
            if r.rel is Rel.EQ or i in implicit:
                rows.append(Row(r.coeffs, Rel.EQ, r.rhs))
            else:
                rows.append(Row(r.coeffs, Rel.LT, r.rhs))
        return feasible(LinearSystem(self.dim, rows))

    def to_json(self) -> list[dict]:
        return self.system.to_json()

    @classmethod
    def from_json(cls, dim: int, rows: list[dict]) -> "Polyhedron":
        return cls(dim, [Row.from_json(r) for r in rows])

    def __repr__(self) -> str:
        return f"Polyhedron(dim={self.dim}, rows={len(self.rows)})"


def tangent_cone_polyhedral(P: Polyhedron, x) -> Polyhedron:
    """T(P; x): active inequality rows and all equality rows, made homogeneous."""
    x = to_fractions(x)
    if not P.contains(x):
        raise PointNotInSet("point does not belong to the polyhedron")
    zero = Fraction(0)
    rows = []
    for r in P.rows:
        if r.rel is Rel.EQ:
            rows.append(Row(r.coeffs, Rel.EQ, zero))
        elif dot(r.coeffs, x) == r.rhs:
            rows.append(Row(r.coeffs, Rel.LE, zero))
    return Polyhedron(P.dim, rows)


def tangent2_polyhedral(P: Polyhedron, x, u) -> Polyhedron:
    """Second-order tangent set of a polyhedron: T(T(P; x); u)."""
    cone = tangent_cone_polyhedral(P, x)
    u = to_fractions(u)
    if not cone.contains(u):
        raise DirectionNotTangent("direction is not tangent at the point")
    return tangent_cone_polyhedral(cone, u)


# ---------------------------------------------------------------------------
# Exact linear algebra helpers


def nullspace(rows: Sequence[Sequence[Fraction]], dim: int) -> list[tuple[Fraction, ...]]:
    """Basis of ``{x : rows @ x = 0}`` by reduced row echelon form."""
    M = [list(r) for r in rows if any(c != 0 for c in r)]
    pivots = []
    r = 0
    for c in range(dim):
        piv = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        p = M[r][c]
        M[r] = [v / p for v in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    free = [c for c in range(dim) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * dim
        v[f] = Fraction(1)
        for i, c in enumerate(pivots):
            v[c] = -M[i][f]
        basis.append(tuple(v))
    return basis


def rank(rows: Sequence[Sequence[Fraction]], dim: int) -> int:
    return dim - len(nullspace(rows, dim))


def _unit_normalize(v: Sequence[Fraction]) -> tuple[Fraction, ...]:
    m = max(abs(c) for c in v)
    return tuple(c / m for c in v)


def cone_generators(cone: Polyhedron) -> list[tuple[Fraction, ...]]:
    """Generators of a polyhedral cone ``{x : E x = 0, A x <= 0}``.

    Lineality directions are returned in both signs; extreme rays of the
    pointed part are found by enumerating rank-(d-1) row subsets. Vectors are
    scaled to max |entry| == 1. Intended for small dimensions.
    """
    d = cone.dim
    if any(r.rhs != 0 for r in cone.rows):
        raise ValueError("cone_generators needs a homogeneous system")
    eq_rows = [r.coeffs for r in cone.rows if r.rel is Rel.EQ]
    ineq_rows = [r.coeffs for r in cone.rows if r.rel is Rel.LE]
    gens: list[tuple[Fraction, ...]] = []

    lineality = nullspace(eq_rows + ineq_rows, d)
    for v in lineality:
        v = _unit_normalize(v)
        gens += [v, tuple(-c for c in v)]

    # pointed part: restrict to the orthogonal complement of the lineality space
    base_eq = eq_rows + [tuple(v) for v in lineality]
    base_rank = rank(base_eq, d)
    need = d - 1 - base_rank
    if need < 0:
        return _dedupe(gens)
    seen = set()
    for subset in combinations(range(len(ineq_rows)), need):
        active = base_eq + [ineq_rows[i] for i in subset]
        ns = nullspace(active, d)
        if len(ns) != 1:
            continue
        for sign in (1, -1):
            ray = tuple(sign * c for c in ns[0])
            if all(dot(a, ray) <= 0 for a in ineq_rows) and all(dot(a, ray) == 0 for a in eq_rows):
                ray = _unit_normalize(ray)
                if ray not in seen:
                    seen.add(ray)
                    gens.append(ray)
    return _dedupe(gens)


def _dedupe(vs):
    out = []
    for v in vs:
        if v not in out:
            out.append(v)
    return out


# ---------------------------------------------------------------------------
# Theorems of the alternative
#
# All statements are written in the "<= 0" convention used by the optimality
# systems; blocks are lists of rows over x in R^d.
#
#   Motzkin:  A x < 0, B x <= 0, C x = 0
#        vs.  A'y1 + B'y2 + C'y3 = 0,  y1 >= 0, y1 != 0, y2 >= 0
#   Tucker:   B x <= 0, B x != 0, C x <= 0, D x = 0
#        vs.  B'y2 + C'y3 + D'y4 = 0,  y2 > 0, y3 >= 0
#   Slater:   A x < 0, B x <= 0, B x != 0, C x <= 0, D x = 0
#        vs.  A'y1 + B'y2 + C'y3 + D'y4 = 0,  y3 >= 0 and
#             either (y1 >= 0, y1 != 0, y2 >= 0) or (y1 >= 0, y2 > 0)
#
# An empty B block makes Slater's semipositive part vacuous (it reduces to
# Motzkin); Tucker rejects it.


@dataclass(frozen=True)
class AlternativeOutcome:
    theorem: str  # SLATER | TUCKER | MOTZKIN
    branch: str  # PRIMAL | DUAL
    witness: tuple[Fraction, ...]
    parts: dict = field(default_factory=dict, compare=False)

    def to_json(self) -> dict:
        return {
            "theorem": self.theorem,
            "branch": self.branch,
            "witness": [_frac_json(q) for q in self.witness],
            "parts": {k: [_frac_json(q) for q in v] for k, v in self.parts.items()},
        }


def _block(rows, d) -> list[tuple[Fraction, ...]]:
    out = [to_fractions(r) for r in rows]
    for r in out:
        if len(r) != d:
            raise ValueError(f"block row has length {len(r)}, expected {d}")
    return out


def _check_dim(d: int):
    if d > EXACT_DIM_LIMIT:
        raise DimensionLimitExceeded(f"exact path limited to {EXACT_DIM_LIMIT} variables, got {d}")


def _primal(d, strict=(), semipos=(), weak=(), eq=()) -> tuple[Fraction, ...] | None:
    zero = Fraction(0)
    base = LinearSystem(d)
    for a in strict:
        base.rows.append(Row(a, Rel.LT, zero))
    for a in list(semipos) + list(weak):
        base.rows.append(Row(a, Rel.LE, zero))
    for a in eq:
        base.rows.append(Row(a, Rel.EQ, zero))
    if not semipos:
        return feasible(base)
    for a in semipos:
        w = feasible(base.extended([Row(a, Rel.LT, zero)]))
        if w is not None:
            return w
    return None


def _dual(d, blocks, signs, extra):
    """Solve  sum_b B_b' y_b = 0  with per-block sign rules.

    ``blocks`` is an ordered list of (name, rows); the multiplier vector is
    laid out in that order. ``signs[name]`` in {"free", "nonneg", "pos"}
    ("pos" is encoded as >= 1 by homogeneity). ``extra`` adds rows built from
    (offsets) for normalizations such as sum(y1) == 1.
    """
    sizes = [len(rows) for _, rows in blocks]
    total = sum(sizes)
    _check_dim(total)
    system = LinearSystem(total)
    for c in range(d):
        coeffs = []
        for _, rows in blocks:
            coeffs += [r[c] for r in rows]
        system.rows.append(Row(tuple(coeffs), Rel.EQ, Fraction(0)))
    offset = 0
    offsets = {}
    for (name, rows), size in zip(blocks, sizes):
        offsets[name] = (offset, size)
        for i in range(size):
            e = [Fraction(0)] * total
            e[offset + i] = Fraction(-1)
            if signs[name] == "nonneg":
                system.rows.append(Row(tuple(e), Rel.LE, Fraction(0)))
            elif signs[name] == "pos":
                system.rows.append(Row(tuple(e), Rel.LE, Fraction(-1)))
        offset += size
    for name in extra:
        start, size = offsets[name]
        e = [Fraction(0)] * total
        for i in range(size):
            e[start + i] = Fraction(1)
        system.rows.append(Row(tuple(e), Rel.EQ, Fraction(1)))
    return feasible(system), offsets


def _split(w, offsets) -> dict:
    return {name: tuple(w[s : s + n]) for name, (s, n) in offsets.items()}


def _dual_residual_zero(d, blocks, parts) -> bool:
    for c in range(d):
        total = Fraction(0)
        for name, rows in blocks:
            total += sum((r[c] * y for r, y in zip(rows, parts[name])), Fraction(0))
        if total != 0:
            return False
    return True


def motzkin_alternative(A, B=(), C=(), *, dim: int) -> AlternativeOutcome:
    d = dim
    _check_dim(d)
    A, B, C = _block(A, d), _block(B, d), _block(C, d)
    x = _primal(d, strict=A, weak=B, eq=C)
    blocks = [("y3", C), ("y2", B), ("y1", A)]
    if A:
        y, offsets = _dual(d, blocks, {"y1": "nonneg", "y2": "nonneg", "y3": "free"}, ["y1"])
    else:
        y, offsets = None, {}
    out = _decide("MOTZKIN", x, y, offsets)
    _verify(out, d, blocks, lambda p: all(v >= 0 for v in p["y1"]) and sum(p["y1"]) > 0 and all(v >= 0 for v in p["y2"]),
            lambda w: all(dot(a, w) < 0 for a in A) and all(dot(a, w) <= 0 for a in B) and all(dot(a, w) == 0 for a in C))
    return out


def tucker_alternative(B, C=(), D=(), *, dim: int) -> AlternativeOutcome:
    d = dim
    _check_dim(d)
    B, C, D = _block(B, d), _block(C, d), _block(D, d)
    if not B:
        raise ValueError("the Tucker system needs a nonempty semipositive block")
    x = _primal(d, semipos=B, weak=C, eq=D)
    blocks = [("y4", D), ("y3", C), ("y2", B)]
    y, offsets = _dual(d, blocks, {"y2": "pos", "y3": "nonneg", "y4": "free"}, [])
    out = _decide("TUCKER", x, y, offsets)
    _verify(out, d, blocks, lambda p: all(v > 0 for v in p["y2"]) and all(v >= 0 for v in p["y3"]),
            lambda w: all(dot(a, w) <= 0 for a in B) and any(dot(a, w) < 0 for a in B)
            and all(dot(a, w) <= 0 for a in C) and all(dot(a, w) == 0 for a in D))
    return out


def slater_alternative(A, B, C=(), D=(), *, dim: int) -> AlternativeOutcome:
    d = dim
    _check_dim(d)
    A, B, C, D = _block(A, d), _block(B, d), _block(C, d), _block(D, d)
    x = _primal(d, strict=A, semipos=B, weak=C, eq=D)
    blocks = [("y4", D), ("y3", C), ("y1", A), ("y2", B)]
    y, offsets = None, {}
    if B:
        y, offsets = _dual(d, blocks, {"y1": "nonneg", "y2": "pos", "y3": "nonneg", "y4": "free"}, [])
    if y is None and A:
        y, offsets = _dual(d, blocks, {"y1": "nonneg", "y2": "nonneg", "y3": "nonneg", "y4": "free"}, ["y1"])
    out = _decide("SLATER", x, y, offsets)

    def dual_ok(p):
        y1, y2 = p["y1"], p["y2"]
        signs = all(v >= 0 for v in y1) and all(v >= 0 for v in y2) and all(v >= 0 for v in p["y3"])
        return signs and ((sum(y1) > 0) or (bool(y2) and all(v > 0 for v in y2)))

    _verify(out, d, blocks, dual_ok,
            lambda w: all(dot(a, w) < 0 for a in A) and all(dot(a, w) <= 0 for a in B)
            and (not B or any(dot(a, w) < 0 for a in B))
            and all(dot(a, w) <= 0 for a in C) and all(dot(a, w) == 0 for a in D))
    return out


def _decide(theorem, x, y, offsets) -> AlternativeOutcome:
    if (x is None) == (y is None):
        raise AssertionError(f"{theorem}: primal and dual solvability agree; elimination bug")
    if x is not None:
        return AlternativeOutcome(theorem, "PRIMAL", x, {"x": x})
    return AlternativeOutcome(theorem, "DUAL", y, _split(y, offsets))


def _verify(out: AlternativeOutcome, d, blocks, dual_signs_ok, primal_ok):
    if out.branch == "PRIMAL":
        ok = primal_ok(out.witness)
    else:
        ok = _dual_residual_zero(d, blocks, out.parts) and dual_signs_ok(out.parts)
    if not ok:
        raise AssertionError(f"{out.theorem} {out.branch} witness has nonzero residual")
