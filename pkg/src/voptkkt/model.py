"""Problem container and point-local data (values, gradients, active sets)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import expr as ex
from .polyhedra import to_fractions


class ProblemError(ValueError):
    pass


@dataclass(frozen=True)
class Function:
    name: str
    text: str
    expr: ex.Expression

    def value(self, x) -> float:
        return ex.evaluate(self.expr, x)

    def grad(self, x) -> np.ndarray:
        return ex.grad(self.expr, x)


@dataclass(frozen=True)
class Problem:
    """min f(x) subject to g(x) <= 0, x in R^n."""

    name: str
    variables: tuple[str, ...]
    objectives: tuple[Function, ...]
    constraints: tuple[Function, ...] = ()
    overrides: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if not self.variables:
            raise ProblemError("a problem needs at least one variable")
        if not self.objectives:
            raise ProblemError("a problem needs at least one objective")
        names = [f.name for f in self.objectives + self.constraints]
        if len(set(names)) != len(names):
            raise ProblemError(f"function names must be unique: {names}")

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.objectives)

    @property
    def m(self) -> int:
        return len(self.constraints)

    def function(self, name: str) -> Function:
        for f in self.objectives + self.constraints:
            if f.name == name:
                return f
        raise KeyError(name)

    @classmethod
    def from_dict(cls, data: dict) -> "Problem":
        try:
            variables = tuple(data["variables"])
            objectives = data["objectives"]
        except KeyError as e:
            raise ProblemError(f"problem file is missing field {e.args[0]!r}") from None

        def build(items, prefix):
            out = []
            for k, item in enumerate(items, start=1):
                if isinstance(item, str):
                    item = {"expr": item}
                name = item.get("name", f"{prefix}{k}")
                text = item["expr"]
                try:
                    e = ex.parse(text, variables)
                except ex.ExpressionError as err:
                    raise ProblemError(f"{name}: {err}") from err
                out.append(Function(name, text, e))
            return tuple(out)

        return cls(
            name=data.get("name", "problem"),
            variables=variables,
            objectives=build(objectives, "f"),
            constraints=build(data.get("constraints", []), "g"),
            overrides=data.get("overrides", {}) or {},
        )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "variables": list(self.variables),
            "objectives": [{"name": f.name, "expr": f.text} for f in self.objectives],
            "constraints": [{"name": g.name, "expr": g.text} for g in self.constraints],
            "overrides": self.overrides,
        }


def load_problem(path) -> Problem:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ProblemError(f"{path}: invalid JSON: {e}") from e
    return Problem.from_dict(data)


def as_point(P: Problem, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != P.n:
        raise ProblemError(f"point must have {P.n} coordinates, got {x.shape[0]}")
    return x


# ---------------------------------------------------------------------------
# Point analysis


@dataclass(frozen=True)
class PointAnalysis:
    x0: np.ndarray
    feasible: bool
    f_values: np.ndarray
    g_values: np.ndarray
    f_grads: np.ndarray  # (l, n)
    g_grads: np.ndarray  # (m, n)
    active: tuple[int, ...]
    tol_act: float
    warnings: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return self.x0.shape[0]

    def f_grads_q(self):
        return [to_fractions(g) for g in self.f_grads]

    def g_grads_q(self):
        return [to_fractions(g) for g in self.g_grads]

    def to_json(self, P: Problem) -> dict:
        return {
            "point": self.x0.tolist(),
            "feasible": self.feasible,
            "objective_values": {f.name: float(v) for f, v in zip(P.objectives, self.f_values)},
            "constraint_values": {g.name: float(v) for g, v in zip(P.constraints, self.g_values)},
            "objective_gradients": {f.name: self.f_grads[i].tolist() for i, f in enumerate(P.objectives)},
            "constraint_gradients": {g.name: self.g_grads[j].tolist() for j, g in enumerate(P.constraints)},
            "active_set": [P.constraints[j].name for j in self.active],
            "tol_act": self.tol_act,
            "warnings": list(self.warnings),
        }


def analyze_point(P: Problem, x0, tol_act: float = 1e-8) -> PointAnalysis:
    x0 = as_point(P, x0)
    f_vals = np.array([f.value(x0) for f in P.objectives])
    g_vals = np.array([g.value(x0) for g in P.constraints])
    # + 0.0 folds negative zeros so reports print 0.0
    f_grads = np.array([f.grad(x0) for f in P.objectives]).reshape(P.l, P.n) + 0.0
    g_grads = np.array([g.grad(x0) for g in P.constraints]).reshape(P.m, P.n) + 0.0
    active = tuple(j for j in range(P.m) if abs(g_vals[j]) <= tol_act)
    feasible = bool(np.all(g_vals <= tol_act))
    warnings = []
    if not feasible:
        bad = [P.constraints[j].name for j in range(P.m) if g_vals[j] > tol_act]
        warnings.append(f"InfeasiblePoint: constraints violated: {', '.join(bad)}")
    for j in range(P.m):
        if 0 < g_vals[j] <= tol_act or tol_act < abs(g_vals[j]) <= 100 * tol_act:
            warnings.append(f"BorderlineActivity: {P.constraints[j].name} = {g_vals[j]:.3e}")
    return PointAnalysis(x0, feasible, f_vals, g_vals, f_grads, g_grads, active, tol_act, tuple(warnings))


def direction_active_set(pa: PointAnalysis, u, tol_dir: float = 1e-8) -> tuple[int, ...]:
    """J(x0; u): active constraints whose gradient is orthogonal to u."""
    u = np.asarray(u, dtype=float)
    band = tol_dir * (1.0 + np.linalg.norm(u))
    return tuple(j for j in pa.active if abs(pa.g_grads[j] @ u) <= band)


# ---------------------------------------------------------------------------
# Comparison sets Q0, M^i, Q^i, Q


@dataclass(frozen=True)
class SetSpec:
    kind: str  # "Q0" | "M" | "Qi" | "Q"
    x0: tuple[float, ...]
    f0: tuple[float, ...]
    index: int | None = None  # 0-based objective index for M / Qi

    def __post_init__(self):
        if self.kind not in ("Q0", "M", "Qi", "Q"):
            raise ValueError(f"unknown set kind {self.kind!r}")
        if self.kind in ("M", "Qi") and self.index is None:
            raise ValueError(f"set kind {self.kind} needs an objective index")

    @property
    def label(self) -> str:
        if self.kind == "M":
            return f"M{self.index + 1}"
        if self.kind == "Qi":
            return f"Q{self.index + 1}"
        return self.kind

    def objective_indices(self, l: int) -> list[int]:  # noqa: E741
        if self.kind == "Q0":
            return []
        if self.kind == "M":
            return [self.index]
        if self.kind == "Qi":
            return [k for k in range(l) if k != self.index]
        return list(range(l))


def set_spec(P: Problem, label: str, x0) -> SetSpec:
    """Parse "Q0", "Q", "M<i>" or "Q<i>" (1-based) at reference point x0."""
    x0 = as_point(P, x0)
    f0 = tuple(float(f.value(x0)) for f in P.objectives)
    x0t = tuple(float(v) for v in x0)
    if label in ("Q0", "Q"):
        return SetSpec(label, x0t, f0)
    if label[:1] in ("M", "Q") and label[1:].isdigit():
        i = int(label[1:]) - 1
        if not 0 <= i < P.l:
            raise ProblemError(f"set {label}: objective index out of range")
        return SetSpec("M" if label[0] == "M" else "Qi", x0t, f0, i)
    raise ProblemError(f"unknown set label {label!r}")


def defining_functions(P: Problem, s: SetSpec) -> list[tuple[str, ex.Expression, float]]:
    """(name, h, offset) triples with set(s) = {x : h(x) - offset <= 0 for all}."""
    out = [(g.name, g.expr, 0.0) for g in P.constraints]
    for k in s.objective_indices(P.l):
        out.append((P.objectives[k].name, P.objectives[k].expr, s.f0[k]))
    return out


def membership(P: Problem, s: SetSpec, x, tol: float = 0.0) -> bool:
    x = as_point(P, x)
    return all(ex.evaluate(h, x) - off <= tol for _, h, off in defining_functions(P, s))


def membership_by_intersection(P: Problem, s: SetSpec, x, tol: float = 0.0) -> bool:
    """Same predicate computed as an intersection of M^k sets."""
    x = as_point(P, x)
    ks = s.objective_indices(P.l)
    base = SetSpec("Q0", s.x0, s.f0)
    if not ks:
        return membership(P, base, x, tol)
    return all(membership(P, SetSpec("M", s.x0, s.f0, k), x, tol) for k in ks)


def violations(P: Problem, s: SetSpec, points: np.ndarray) -> np.ndarray:
    """Per-point, per-function values h(x) - offset, shape (N, #functions)."""
    cols = [ex.eval_batch(h, points) - off for _, h, off in defining_functions(P, s)]
    if not cols:
        return np.zeros((np.atleast_2d(points).shape[0], 0))
    return np.stack(cols, axis=1)


def magnitudes(P: Problem, s: SetSpec, points: np.ndarray) -> np.ndarray:
    cols = [ex.magnitude_batch(h, points) + abs(off) for _, h, off in defining_functions(P, s)]
    if not cols:
        return np.zeros((np.atleast_2d(points).shape[0], 0))
    return np.stack(cols, axis=1)


def sequence_points(points: Sequence) -> np.ndarray:
    return np.atleast_2d(np.asarray(points, dtype=float))
