"""Falsification of efficiency and of bounded trade-offs by sampling."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import expr as ex
from . import model
from .model import Problem

_NOISE = 64.0 * np.finfo(float).eps
STEPS = tuple(10.0**-k for k in range(1, 7))


@dataclass(frozen=True)
class EfficiencyReport:
    kind: str  # efficiency | geoffrion
    status: str  # NotFalsified | DominatedBy | UnboundedTradeoff
    budget: int
    evaluations: int
    witness: tuple[float, ...] | None = None
    index: int | None = None  # gaining objective (0-based) for trade-offs
    witnesses: tuple[tuple[tuple[float, ...], float], ...] = ()
    growth_table: tuple[tuple[float, float], ...] = ()
    direction: tuple[float, ...] | None = None
    mmax: float | None = None
    dominance: tuple[float, ...] | None = None
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def falsified(self) -> bool:
        return self.status != "NotFalsified"

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "status": self.status,
            "budget": self.budget,
            "evaluations": self.evaluations,
            "witness": None if self.witness is None else list(self.witness),
            "index": None if self.index is None else self.index + 1,
            "witnesses": [{"x": list(x), "ratio": r} for x, r in self.witnesses],
            "growth_table": [{"a": a, "ratio": r} for a, r in self.growth_table],
            "direction": None if self.direction is None else list(self.direction),
            "mmax": self.mmax,
            "dominance": None if self.dominance is None else list(self.dominance),
            "notes": list(self.notes),
        }


class _Evaluator:
    def __init__(self, P: Problem, x0):
        self.P = P
        self.x0 = model.as_point(P, x0)
        self.f0 = np.array([f.value(self.x0) for f in P.objectives])
        self.count = 0

    def __call__(self, X: np.ndarray):
        """Objective values, their noise bounds and feasibility for a batch."""
        X = np.atleast_2d(X)
        self.count += X.shape[0]
        F = np.stack([ex.eval_batch(f.expr, X) for f in self.P.objectives], axis=1)
        N = np.stack([ex.magnitude_batch(f.expr, X) for f in self.P.objectives], axis=1) * _NOISE
        if self.P.m:
            G = np.stack([ex.eval_batch(g.expr, X) for g in self.P.constraints], axis=1)
            feas = np.all(G <= 0, axis=1)
        else:
            feas = np.ones(X.shape[0], dtype=bool)
        return F, N, feas

    def dominates(self, x) -> bool:
        """Fresh single-point check: feasible, no worse anywhere, resolvably better somewhere."""
        F, N, feas = self(np.asarray(x, dtype=float)[None, :])
        d = F[0] - self.f0
        return bool(feas[0] and np.all(d <= 0) and np.any(d < -N[0]))


def _grid(center: np.ndarray, radius: float, per_axis: int) -> np.ndarray:
    axes = [np.linspace(c - radius, c + radius, per_axis) for c in center]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def falsify_efficiency(P: Problem, x0, budget: int = 4096, radius: float = 1.0, refinements: int = 3) -> EfficiencyReport:
    """Grid search in a box around x0 for a feasible dominating point."""
    ev = _Evaluator(P, x0)
    n = P.n
    per_round = max(budget // (refinements + 1), 2**n)
    per_axis = max(2, int(round(per_round ** (1.0 / n))))
    if per_axis % 2 == 0:
        per_axis += 1  # keep the centre on the grid
    centers = [ev.x0]
    r = radius
    for rnd in range(refinements + 1):
        pts = np.vstack([_grid(c, r, per_axis) for c in centers])
        F, N, feas = ev(pts)
        D = F - ev.f0[None, :]
        dom = feas & np.all(D <= 0, axis=1) & np.any(D < -N, axis=1)
        cand = np.flatnonzero(dom)
        # best improvement first, then closest to the centre of the search
        dist = np.linalg.norm(pts[cand] - ev.x0, axis=1)
        for k in cand[np.lexsort((dist, D[cand].max(axis=1)))]:
            if ev.dominates(pts[k]):
                return EfficiencyReport("efficiency", "DominatedBy", budget, ev.count, tuple(pts[k].tolist()))
        # refine around the feasible points closest to dominating
        score = np.where(feas, D.max(axis=1), np.inf)
        order = np.argsort(score, kind="stable")[:4]
        centers = [pts[k] for k in order if np.isfinite(score[k])] or [ev.x0]
        r /= 4.0
    return EfficiencyReport("efficiency", "NotFalsified", budget, ev.count,
                            notes=("sampling can falsify efficiency but not certify it",))


def direction_net(n: int) -> np.ndarray:
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        ang = 2 * np.pi * np.arange(64) / 64
        D = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        D[np.abs(D) < 1e-12] = 0.0  # exact axis directions
        return D
    eye = np.eye(n)
    dirs = [eye, -eye]
    for i, j in combinations(range(n), 2):
        for si in (1.0, -1.0):
            for sj in (1.0, -1.0):
                d = np.zeros(n)
                d[i], d[j] = si, sj
                dirs.append(d[None, :] / np.sqrt(2))
    return np.vstack(dirs)


def _tradeoff(d: np.ndarray, noise: np.ndarray):
    """Worst-case ratio max_i min_j gain_i / loss_j, its gaining index, and a dominance flag."""
    gains = -d > noise
    losses = d > noise
    if not gains.any():
        return None, None, False
    if not losses.any():
        return np.inf, int(np.argmax(-d)), bool(np.all(d <= 0))
    best_loss = d[losses].max()  # the most favourable j for each i
    ratios = np.where(gains, -d / best_loss, -np.inf)
    i = int(np.argmax(ratios))
    return float(ratios[i]), i, False


def falsify_geoffrion(P: Problem, x0, mmax: float = 1e3, budget: int = 4096, min_growth: int = 3) -> EfficiencyReport:
    """Ray scan x0 + a d for unbounded trade-off ratios."""
    ev = _Evaluator(P, x0)
    if P.l == 1:
        return EfficiencyReport("geoffrion", "NotFalsified", budget, 0, mmax=mmax,
                                notes=("single objective: no trade-offs exist",))
    dirs = direction_net(P.n)
    steps = np.array(STEPS)
    dominance = None
    best = None
    for d in dirs:
        if ev.count + len(steps) > budget:
            break
        X = ev.x0[None, :] + steps[:, None] * d[None, :]
        F, N, feas = ev(X)
        table = []
        for k in range(len(steps)):
            if not feas[k]:
                table.append((float(steps[k]), None, None))
                continue
            ratio, i, dom = _tradeoff(F[k] - ev.f0, N[k])
            if dom and dominance is None and ev.dominates(X[k]):
                dominance = tuple(X[k].tolist())
            table.append((float(steps[k]), ratio, i))
        # longest run of strictly growing finite ratios with a common gaining index
        run = []
        for a, ratio, i in table:
            if ratio is None or not np.isfinite(ratio) or (run and (ratio <= run[-1][1] or i != run[-1][2])):
                run = [] if ratio is None or not np.isfinite(ratio) else [(a, ratio, i)]
                continue
            run.append((a, ratio, i))
            if len(run) >= min_growth + 1 and ratio > mmax:
                cand = (ratio, tuple(d.tolist()), list(run))
                if best is None or cand[0] > best[0]:
                    best = cand
                break
    notes = []
    if dominance is not None:
        notes.append("a dominating point was found; the point is not efficient")
    if best is None:
        return EfficiencyReport("geoffrion", "NotFalsified", budget, ev.count, mmax=mmax, dominance=dominance,
                                notes=tuple(notes) + ("no ray exceeded the bound with sustained growth",))
    ratio, direction, run = best
    x0v = ev.x0
    witnesses = tuple((tuple((x0v + a * np.array(direction)).tolist()), r) for a, r, _ in run)
    # fresh re-evaluation of the last witness
    xw = np.array(witnesses[-1][0])
    F, N, feas = ev(xw[None, :])
    r_check, i_check, _ = _tradeoff(F[0] - ev.f0, N[0])
    assert feas[0] and r_check is not None and r_check > mmax and i_check == run[-1][2]
    return EfficiencyReport(
        "geoffrion", "UnboundedTradeoff", budget, ev.count,
        witness=witnesses[-1][0], index=run[-1][2], witnesses=witnesses,
        growth_table=tuple((a, r) for a, r, _ in run), direction=direction, mmax=mmax,
        dominance=dominance, notes=tuple(notes),
    )
