"""First-order cones, the descent system and first-order multiplier systems."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .model import PointAnalysis
from .polyhedra import (
    LinearSystem,
    Polyhedron,
    Rel,
    Row,
    _frac_json,
    cone_generators,
    dot,
    feasible,
)

ZERO = Fraction(0)
ONE = Fraction(1)


def _frac_list(v) -> list:
    return [_frac_json(q) for q in v]


@dataclass(frozen=True)
class CriticalCone:
    cone: Polyhedron
    generators: tuple[tuple[Fraction, ...], ...]

    @property
    def is_trivial(self) -> bool:
        """True when the cone is {0}."""
        return not self.generators

    def to_json(self) -> dict:
        return {
            "rows": self.cone.to_json(),
            "generators": [_frac_list(g) for g in self.generators],
            "trivial": self.is_trivial,
        }


@dataclass(frozen=True)
class MultiplierCertificate:
    kind: str  # FRITZ_JOHN | SFKKT | SSKKT
    lam: tuple[Fraction, ...]
    mu: tuple[Fraction, ...]  # one entry per constraint, zero off the support
    stationarity: tuple[Fraction, ...]
    curvature: Fraction | None = None  # sum lam*xi + sum mu*zeta, SSKKT only
    robust: bool = True
    extra: dict = field(default_factory=dict, compare=False)

    def to_json(self) -> dict:
        out = {
            "kind": self.kind,
            "lambda": _frac_list(self.lam),
            "lambda_float": [float(q) for q in self.lam],
            "mu": _frac_list(self.mu),
            "mu_float": [float(q) for q in self.mu],
            "stationarity_residual": _frac_list(self.stationarity),
            "robust": self.robust,
        }
        if self.curvature is not None:
            out["curvature_value"] = _frac_json(self.curvature)
            out["curvature_value_float"] = float(self.curvature)
        out.update(self.extra)
        return out


# ---------------------------------------------------------------------------
# Cones


def linearizing_cone(pa: PointAnalysis) -> Polyhedron:
    rows = [Row(g, Rel.LE, ZERO) for g in pa.f_grads_q()]
    gq = pa.g_grads_q()
    rows += [Row(gq[j], Rel.LE, ZERO) for j in pa.active]
    return Polyhedron(pa.n, rows)


def critical_cone(pa: PointAnalysis) -> CriticalCone:
    rows = [Row(g, Rel.EQ, ZERO) for g in pa.f_grads_q()]
    gq = pa.g_grads_q()
    rows += [Row(gq[j], Rel.LE, ZERO) for j in pa.active]
    cone = Polyhedron(pa.n, rows)
    return CriticalCone(cone, tuple(cone_generators(cone)))


# ---------------------------------------------------------------------------
# Descent system: <grad f_i, u> <= 0 for all i, < 0 for some i, <grad g_j, u> <= 0 on J(x0)


def find_descent_direction(pa: PointAnalysis) -> tuple[Fraction, ...] | None:
    fq = pa.f_grads_q()
    gq = pa.g_grads_q()
    base = [Row(a, Rel.LE, ZERO) for a in fq] + [Row(gq[j], Rel.LE, ZERO) for j in pa.active]
    for k, a in enumerate(fq):
        # strictness scaled to <= -1 by homogeneity
        w = feasible(LinearSystem(pa.n, base + [Row(a, Rel.LE, -ONE)]))
        if w is not None:
            return w
    return None


# ---------------------------------------------------------------------------
# Multiplier systems


def _stationarity(fq, gq, lam, mu) -> tuple[Fraction, ...]:
    n = len(fq[0])
    out = []
    for c in range(n):
        s = sum((fq[i][c] * lam[i] for i in range(len(fq))), ZERO)
        s += sum((gq[j][c] * mu[j] for j in range(len(gq))), ZERO)
        out.append(s)
    return tuple(out)


def solve_multipliers(
    fq: Sequence[Sequence[Fraction]],
    gq: Sequence[Sequence[Fraction]],
    support: Sequence[int],
    *,
    lam_positive: bool,
    normalize_sum: bool = False,
    curv_f: Sequence[Fraction] | None = None,
    curv_g: Sequence[Fraction] | None = None,
) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]] | None:
    """Find (lam, mu) with sum lam_i grad f_i + sum mu_j grad g_j = 0.

    mu >= 0 lives on ``support``; lam >= 1 when ``lam_positive`` (an exact
    encoding of lam > 0 for these homogeneous systems), else lam >= 0.
    ``normalize_sum`` adds sum(lam) + sum(mu) == 1.  With curvature constants
    the row sum lam*curv_f + sum mu*curv_g >= 0 is added.

    The mu unknowns are placed first so the elimination assigns them first
    and they come out as small as possible.
    """
    l, n = len(fq), len(fq[0])
    s = len(support)
    dim = s + l
    sys = LinearSystem(dim)
    for c in range(n):
        coeffs = [gq[j][c] for j in support] + [fq[i][c] for i in range(l)]
        sys.rows.append(Row(tuple(coeffs), Rel.EQ, ZERO))
    for k in range(dim):
        e = [ZERO] * dim
        e[k] = -ONE
        bound = -ONE if (lam_positive and k >= s) else ZERO
        sys.rows.append(Row(tuple(e), Rel.LE, bound))
    if normalize_sum:
        sys.rows.append(Row((ONE,) * dim, Rel.EQ, ONE))
    if curv_f is not None:
        coeffs = [-curv_g[j] for j in support] + [-c for c in curv_f]
        sys.rows.append(Row(tuple(coeffs), Rel.LE, ZERO))
    w = feasible(sys)
    if w is None:
        return None
    mu = [ZERO] * len(gq)
    for pos, j in enumerate(support):
        mu[j] = w[pos]
    return tuple(w[s:]), tuple(mu)


def fritz_john(pa: PointAnalysis) -> MultiplierCertificate | None:
    fq, gq = pa.f_grads_q(), pa.g_grads_q()
    sol = solve_multipliers(fq, gq, pa.active, lam_positive=False, normalize_sum=True)
    if sol is None:
        return None
    lam, mu = sol
    st = _stationarity(fq, gq, lam, mu)
    assert all(v == 0 for v in st)
    return MultiplierCertificate("FRITZ_JOHN", lam, mu, st)


def _normalize_min(lam, mu):
    m = min(lam)
    return tuple(v / m for v in lam), tuple(v / m for v in mu)


def strong_fkkt(pa: PointAnalysis) -> MultiplierCertificate | None:
    """First-order KKT with every objective multiplier strictly positive."""
    fq, gq = pa.f_grads_q(), pa.g_grads_q()
    sol = solve_multipliers(fq, gq, pa.active, lam_positive=True)
    if sol is None:
        return None
    lam, mu = _normalize_min(*sol)
    st = _stationarity(fq, gq, lam, mu)
    assert all(v == 0 for v in st)
    return MultiplierCertificate("SFKKT", lam, mu, st)


def check_lam_mu(pa: PointAnalysis, cert: MultiplierCertificate) -> bool:
    """Exact re-verification of sign, support and stationarity of a certificate."""
    fq, gq = pa.f_grads_q(), pa.g_grads_q()
    if any(v < 0 for v in cert.lam) or any(v < 0 for v in cert.mu):
        return False
    if any(cert.mu[j] != 0 for j in range(len(gq)) if j not in pa.active):
        return False
    if cert.kind in ("SFKKT", "SSKKT") and any(v <= 0 for v in cert.lam):
        return False
    if sum(cert.lam) + sum(cert.mu) == 0:
        return False
    return all(v == 0 for v in _stationarity(fq, gq, cert.lam, cert.mu))


def as_float(v) -> np.ndarray:
    return np.array([float(q) for q in v])


def lex_pairs_at(grads_q, first: Sequence[Fraction], curv: Sequence[Fraction], v) -> list[tuple[Fraction, Fraction]]:
    """(<a, u>, <a, v> + c) for each gradient row a."""
    v = tuple(v)
    return [(first[k], dot(grads_q[k], v) + curv[k]) for k in range(len(grads_q))]
