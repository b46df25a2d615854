"""Support values of the second-order subdifferential along a direction.

For a C^{1,1} function phi the largest value of <xi, u> over the
second-order subdifferential at x0 in direction u equals

    limsup_{x -> x0, t -> 0+} (<grad phi(x + t u), u> - <grad phi(x), u>) / t

and the smallest value is the matching liminf.  Both are estimated here by
sampling base points x = x0 + r * w on nested sphere patterns, crossed with a
geometric sequence of steps t.  The sampled maximum never exceeds the true
limsup (it is an inner estimate); callers compare against it with a margin.
"""

from __future__ import annotations

import math
import threading
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import expr as ex
from .config import Dd2Schedule

_GOLDEN = math.pi * (3.0 - math.sqrt(5.0))
_MATCH_TOL = 1e-12


class Source(str, Enum):
    SAMPLED = "SAMPLED"
    OVERRIDE = "OVERRIDE"
    EXACT = "EXACT"  # u = 0 or an affine function; no sampling needed


class InvalidInterval(ValueError):
    pass


class OverrideConflict(UserWarning):
    pass


@dataclass(frozen=True)
class Dd2Estimate:
    upper: float
    lower: float
    source: Source
    trace: tuple[tuple[float, float, float], ...] = ()  # (t_k, running upper, running lower)
    samples: int = 0
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        if self.lower > self.upper:
            raise InvalidInterval(f"lower {self.lower} exceeds upper {self.upper}")

    @property
    def one_sided(self) -> bool:
        """True when the values are inner estimates rather than exact."""
        return self.source is Source.SAMPLED

    def to_json(self) -> dict:
        return {
            "upper": self.upper,
            "lower": self.lower,
            "source": self.source.value,
            "one_sided": self.one_sided,
            "samples": self.samples,
            "trace": [list(row) for row in self.trace],
            "warnings": list(self.warnings),
        }


# ---------------------------------------------------------------------------
# Sphere patterns


def _halton(count: int, base: int) -> np.ndarray:
    out = np.empty(count)
    for i in range(count):
        f, r, k = 1.0, 0.0, i + 1
        while k:
            f /= base
            r += f * (k % base)
            k //= base
        out[i] = r
    return out


_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53)


def sphere_pattern(n: int, S: int, seed: int | None = None) -> np.ndarray:
    """S unit vectors in R^n; for fixed n and seed the first k rows do not depend on S."""
    if seed is not None:
        rng = np.random.default_rng(seed)
        W = rng.standard_normal((S, n))
    elif n == 1:
        W = np.array([[1.0 if s % 2 == 0 else -1.0] for s in range(S)])
    elif n == 2:
        ang = _GOLDEN * np.arange(S)
        W = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    else:
        # Halton points pushed through the inverse normal CDF give directions
        from scipy.special import ndtri

        cols = [_halton(S, _PRIMES[d % len(_PRIMES)]) for d in range(n)]
        U = np.clip(np.stack(cols, axis=1), 1e-12, 1 - 1e-12)
        W = ndtri(U)
    norms = np.linalg.norm(W, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return W / norms


# ---------------------------------------------------------------------------
# Override registry


@dataclass
class Dd2Registry:
    """Analytic support values keyed by (function id, point, direction).

    A direction parallel to a registered one is matched through the
    2-homogeneity of the support value: u = a * u_reg gives a**2 times the
    registered interval.
    """

    entries: list = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def register(self, fn_id: str, x0, u, upper: float, lower: float) -> None:
        if lower > upper:
            raise InvalidInterval(f"override for {fn_id}: lower {lower} exceeds upper {upper}")
        entry = (fn_id, np.asarray(x0, dtype=float).copy(), np.asarray(u, dtype=float).copy(), float(upper), float(lower))
        with self._lock:
            self.entries = self.entries + [entry]

    def lookup(self, fn_id: str, x0, u) -> tuple[float, float] | None:
        x0 = np.asarray(x0, dtype=float)
        u = np.asarray(u, dtype=float)
        for name, px, pu, up, lo in self.entries:
            if name != fn_id or px.shape != x0.shape or np.max(np.abs(px - x0)) > _MATCH_TOL:
                continue
            k = int(np.argmax(np.abs(pu)))
            if pu[k] == 0:
                continue
            a = u[k] / pu[k]
            if np.max(np.abs(u - a * pu)) <= _MATCH_TOL * (1 + np.max(np.abs(u))):
                return a * a * up, a * a * lo
        return None

    @classmethod
    def from_overrides(cls, overrides: dict) -> "Dd2Registry":
        reg = cls()
        for item in (overrides or {}).get("dd2", []):
            reg.register(item["fn"], item["point"], item["dir"], item["upper"], item["lower"])
        return reg


_DEFAULT_REGISTRY = Dd2Registry()


def register_override(fn_id: str, x0, u, upper: float, lower: float, registry: Dd2Registry | None = None) -> None:
    (registry or _DEFAULT_REGISTRY).register(fn_id, x0, u, upper, lower)


# ---------------------------------------------------------------------------
# Estimation


def _sample(phi: ex.Expression, x0: np.ndarray, u: np.ndarray, sched: Dd2Schedule):
    ts = np.array(sched.steps())
    n = x0.shape[0]
    W = np.vstack([np.zeros((1, n)), sphere_pattern(n, sched.S, sched.seed)])
    radii = sched.c * ts
    # base points indexed by (radius k, pattern s)
    X = x0[None, None, :] + radii[:, None, None] * W[None, :, :]
    Xf = X.reshape(-1, n)
    _, d0 = ex.value_and_dirderiv_batch(phi, Xf, u)
    # shifted points indexed by (base point, step k')
    Y = Xf[:, None, :] + ts[None, :, None] * u[None, None, :]
    _, d1 = ex.value_and_dirderiv_batch(phi, Y.reshape(-1, n), u)
    Q = (d1.reshape(Xf.shape[0], ts.size) - d0[:, None]) / ts[None, :]
    Q = Q.reshape(ts.size, W.shape[0], ts.size)
    if not np.all(np.isfinite(Q)):
        raise ex.DomainError("non-finite difference quotient while sampling second-order variation")
    return ts, Q


def _running_extrema(ts, Q):
    """Row k holds extrema over all (radius, step) pairs with both indices <= k."""
    K = ts.size
    up = np.max(Q, axis=1)  # (k_radius, k_step)
    lo = np.min(Q, axis=1)
    trace = []
    cur_up, cur_lo = -np.inf, np.inf
    for k in range(K):
        cur_up = max(cur_up, up[k, : k + 1].max(), up[: k + 1, k].max())
        cur_lo = min(cur_lo, lo[k, : k + 1].min(), lo[: k + 1, k].min())
        trace.append((float(ts[k]), float(cur_up), float(cur_lo)))
    return trace


def sampled_dd2(phi: ex.Expression, x0, u, sched: Dd2Schedule | None = None) -> Dd2Estimate:
    """Pure sampling estimate; ignores overrides."""
    sched = sched or Dd2Schedule()
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    u = np.asarray(u, dtype=float).reshape(-1)
    if not np.any(u) or ex.is_affine(phi):
        return Dd2Estimate(0.0, 0.0, Source.EXACT)
    ts, Q = _sample(phi, x0, u, sched)
    trace = _running_extrema(ts, Q)
    return Dd2Estimate(trace[-1][1], trace[-1][2], Source.SAMPLED, tuple(trace), int(Q.size))


def upper_dd2(
    phi: ex.Expression,
    x0,
    u,
    sched: Dd2Schedule | None = None,
    *,
    fn_id: str | None = None,
    registry: Dd2Registry | None = None,
    tol_dd2: float = 1e-3,
    check_override: bool = True,
) -> Dd2Estimate:
    """Estimate (max, min) of <xi, u> over the second-order subdifferential.

    A registered override for ``fn_id`` short-circuits the estimate.  When
    ``check_override`` is set the sampler still runs, and an override whose
    interval is strictly inside the sampled one by more than 10 * tol_dd2
    raises an OverrideConflict warning.
    """
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    u = np.asarray(u, dtype=float).reshape(-1)
    if not np.any(u):
        return Dd2Estimate(0.0, 0.0, Source.EXACT)
    reg = registry if registry is not None else _DEFAULT_REGISTRY
    hit = reg.lookup(fn_id, x0, u) if fn_id is not None else None
    if hit is None:
        return sampled_dd2(phi, x0, u, sched)
    up, lo = hit
    notes = []
    if check_override:
        est = sampled_dd2(phi, x0, u, sched)
        # the sampled interval is an inner estimate, so only escaping the override is a conflict
        if est.upper > up + 10 * tol_dd2 or est.lower < lo - 10 * tol_dd2:
            msg = (
                f"OverrideConflict: {fn_id} override [{lo:.6g}, {up:.6g}] but sampling "
                f"reached [{est.lower:.6g}, {est.upper:.6g}]"
            )
            warnings.warn(msg, OverrideConflict, stacklevel=2)
            notes.append(msg)
    return Dd2Estimate(up, lo, Source.OVERRIDE, warnings=tuple(notes))


def scaling_check(phi: ex.Expression, x0, u, alpha: float, sched: Dd2Schedule | None = None) -> float:
    """|upper(alpha u) - alpha^2 upper(u)|; small for any consistent estimator."""
    if alpha == 0:
        raise ValueError("alpha must be nonzero")
    u = np.asarray(u, dtype=float)
    if alpha == 1:
        return 0.0
    a = sampled_dd2(phi, x0, alpha * u, sched).upper
    b = sampled_dd2(phi, x0, u, sched).upper
    return abs(a - alpha * alpha * b)


@dataclass(frozen=True)
class TaylorCheck:
    value: float
    low: float
    high: float
    consistent: bool

    def to_json(self) -> dict:
        return {"value": self.value, "low": self.low, "high": self.high, "consistent": self.consistent}


def taylor_check(phi: ex.Expression, a, b, sched: Dd2Schedule | None = None, margin: float = 0.2) -> TaylorCheck:
    """Second-order Taylor bracket on the segment [a, b].

    2 (phi(b) - phi(a) - <grad phi(a), b - a>) must lie between the smallest
    lower and largest upper support value along b - a taken at points of the
    segment, widened by ``margin``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = b - a
    value = 2.0 * (ex.evaluate(phi, b) - ex.evaluate(phi, a) - float(ex.grad(phi, a) @ d))
    ests = [sampled_dd2(phi, a + s * d, d, sched) for s in np.linspace(0.0, 1.0, 5)]
    low = min(e.lower for e in ests)
    high = max(e.upper for e in ests)
    slack = margin * max(abs(low), abs(high)) + 1e-12 * (1 + float(np.max(np.abs(b))))
    return TaylorCheck(value, low, high, low - slack <= value <= high + slack)
