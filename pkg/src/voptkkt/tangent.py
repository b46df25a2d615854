"""Membership tests for tangent cones and second-order tangent sets.

A vector v belongs to the second-order tangent set of C at x0 in direction u
when points x0 + t u + t^2/2 v' lie in C for a sequence t -> 0 and v' -> v.
The sampled tester works in v'-space step by step:

* it searches a box of radius sigma0 * t around v for a feasible v';
* it samples a ball of radius rho_ref around v and checks whether every
  sample is certifiably outside C.

"Certifiably outside" means the constraint excess beats the rounding-noise
estimate and is large either after division by t^2/2 or relative to the
magnitude of the terms that were summed.  Only steps where t^2/2 is
resolvable against the coordinates of x0 are classified; the last half of
those steps forms the tail used for the verdict.

Refuted is a heuristic certificate.  The exact answer for polyhedral sets is
available through ``tangent2_exact``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import model
from .config import Tolerances, TangentSchedule
from .model import Problem, SetSpec
from .polyhedra import DirectionNotTangent, Polyhedron, PointNotInSet, tangent2_polyhedral
from .subdiff2 import sphere_pattern

_EPS = np.finfo(float).eps
_NOISE_FACTOR = 64.0


class TangentStatus(str, Enum):
    VERIFIED = "Verified"
    REFUTED = "Refuted"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class StepRecord:
    t: float
    best_v: tuple[float, ...]
    best_violation: float  # max scaled excess at best_v
    feasible: bool
    ball_refuted: bool

    def to_json(self) -> dict:
        return {
            "t": self.t,
            "best_v": list(self.best_v),
            "best_violation": self.best_violation,
            "feasible": self.feasible,
            "ball_refuted": self.ball_refuted,
        }


@dataclass(frozen=True)
class TangentVerdict:
    status: TangentStatus
    set_label: str
    x0: tuple[float, ...]
    u: tuple[float, ...]
    v: tuple[float, ...]
    steps: tuple[StepRecord, ...] = ()
    tail_start: int = 0
    heuristic: bool = True
    notes: tuple[str, ...] = field(default_factory=tuple)

    def to_json(self) -> dict:
        return {
            "status": self.status.value,
            "set": self.set_label,
            "x0": list(self.x0),
            "u": list(self.u),
            "v": list(self.v),
            "heuristic": self.heuristic,
            "tail_start": self.tail_start,
            "steps": [s.to_json() for s in self.steps],
            "notes": list(self.notes),
        }


class _Scorer:
    """Scaled constraint excess of x0 + t u + s v' (s = t^2/2) for batches of v'."""

    def __init__(self, P: Problem, s: SetSpec, x0, u, t, eps_ref):
        self.P, self.spec = P, s
        self.base = x0 + t * u
        self.s = 0.5 * t * t
        self.eps_ref = eps_ref

    def evaluate(self, V: np.ndarray):
        X = self.base[None, :] + self.s * V
        H = model.violations(self.P, self.spec, X)
        M = model.magnitudes(self.P, self.spec, X)
        excess = H - _NOISE_FACTOR * _EPS * M
        scaled = excess / self.s
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.where(M > 0, excess / np.where(M > 0, M, 1.0), np.inf)
        certified = (excess > 0) & ((scaled >= self.eps_ref) | (rel >= self.eps_ref))
        score = np.where(certified, np.maximum(scaled, 0) + self.eps_ref, scaled)
        if score.shape[1] == 0:
            n = V.shape[0]
            return np.full(n, -np.inf), np.zeros(n, dtype=bool)
        return score.max(axis=1), certified.any(axis=1)


def _search_directions(n: int) -> np.ndarray:
    eye = np.eye(n)
    dirs = [eye, -eye]
    if n <= 6:
        # all sign diagonals
        signs = np.array(np.meshgrid(*[[-1.0, 1.0]] * n)).reshape(n, -1).T
        dirs.append(signs / np.sqrt(n))
    else:
        ones = np.ones((1, n)) / np.sqrt(n)
        dirs += [ones, -ones]
    return np.vstack(dirs)


def _box_search(scorer: _Scorer, v: np.ndarray, radius: float, tol_t: float, max_iter: int = 60):
    dirs = _search_directions(v.shape[0])
    sc, cert = scorer.evaluate(v[None, :])
    best, bs, bc = v.copy(), sc[0], cert[0]
    step = radius / 2
    for _ in range(max_iter):
        if bs <= tol_t and not bc:
            break
        cand = np.clip(best[None, :] + step * dirs, v - radius, v + radius)
        sc, cert = scorer.evaluate(cand)
        k = int(np.argmin(sc))
        if sc[k] < bs:
            best, bs, bc = cand[k], sc[k], cert[k]
        else:
            step /= 2
            if step < radius * 1e-6:
                break
    return best, float(bs), bool(bs <= tol_t and not bc)


def _ball(v: np.ndarray, rho: float) -> np.ndarray:
    n = v.shape[0]
    eye = np.eye(n)
    pts = [v[None, :], v + rho * eye, v - rho * eye, v + 0.5 * rho * eye, v - 0.5 * rho * eye]
    W = sphere_pattern(n, 32)
    pts += [v + rho * W, v + 0.5 * rho * W]
    return np.vstack(pts)


def tangent2_membership(
    P: Problem,
    s: SetSpec,
    x0,
    u,
    v,
    sched: TangentSchedule | None = None,
    tol: Tolerances | None = None,
) -> TangentVerdict:
    sched = sched or TangentSchedule()
    tol = tol or Tolerances()
    x0 = model.as_point(P, x0)
    u = np.asarray(u, dtype=float).reshape(-1)
    v = np.asarray(v, dtype=float).reshape(-1)
    query = dict(set_label=s.label, x0=tuple(x0.tolist()), u=tuple(u.tolist()), v=tuple(v.tolist()))
    if not model.membership(P, s, x0, tol.act):
        return TangentVerdict(TangentStatus.INCONCLUSIVE, notes=("reference point is not in the set",), **query)
    if not np.any(u) and not np.any(v):
        return TangentVerdict(TangentStatus.VERIFIED, heuristic=False, notes=("zero vector",), **query)

    rho = sched.rho_rel * float(np.linalg.norm(v)) + sched.rho_abs
    ball = _ball(v, rho)
    xscale = 1.0 + float(np.max(np.abs(x0)))
    uscale = float(np.max(np.abs(u))) if u.size else 0.0
    steps = [t for t in sched.steps() if 0.5 * t * t >= sched.resolution * (xscale + t * uscale)]
    if not steps:
        return TangentVerdict(TangentStatus.INCONCLUSIVE, notes=("no resolvable steps in the schedule",), **query)

    records = []
    for t in steps:
        scorer = _Scorer(P, s, x0, u, t, sched.eps_ref)
        best, bs, ok = _box_search(scorer, v, sched.sigma0 * t, tol.tangent)
        _, cert = scorer.evaluate(ball)
        records.append(StepRecord(t, tuple(best.tolist()), bs, ok, bool(cert.all())))

    tail_start = len(records) // 2
    tail = records[tail_start:]
    if all(r.feasible for r in tail):
        status = TangentStatus.VERIFIED
    elif all(r.ball_refuted for r in tail):
        status = TangentStatus.REFUTED
    else:
        status = TangentStatus.INCONCLUSIVE
    return TangentVerdict(status, steps=tuple(records), tail_start=tail_start, **query)


def tangent_membership(P: Problem, s: SetSpec, x0, v, sched=None, tol=None) -> TangentVerdict:
    x0 = model.as_point(P, x0)
    return tangent2_membership(P, s, x0, np.zeros_like(x0), v, sched, tol)


def tangent2_exact(poly: Polyhedron, x0, u, v) -> TangentStatus:
    """Exact membership of v in the second-order tangent set of a polyhedron."""
    try:
        T2 = tangent2_polyhedral(poly, x0, u)
    except (PointNotInSet, DirectionNotTangent):
        # no admissible second-order correction exists
        return TangentStatus.REFUTED
    return TangentStatus.VERIFIED if T2.contains(v) else TangentStatus.REFUTED
