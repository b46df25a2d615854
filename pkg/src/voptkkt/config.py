"""Run configuration: tolerances and sampling schedules, with their defaults."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field


@dataclass(frozen=True)
class Tolerances:
    act: float = 1e-8  # |g_j(x0)| <= act  =>  j active
    dir: float = 1e-8  # |<grad g_j, u>| <= dir * (1 + |u|)  =>  j in J(x0; u)
    dd2: float = 1e-3  # safety margin on sampled curvature / lex first components
    tangent: float = 1e-7  # scaled violation accepted as feasible by the tangent tester

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not value > 0:
                raise ValueError(f"tolerance {name} must be positive, got {value}")


@dataclass(frozen=True)
class Dd2Schedule:
    """Steps t_k = t0 * rho**k (k = 0..K), S perturbations per radius r_k = c * t_k."""

    t0: float = 1e-2
    rho: float = 0.5
    K: int = 20
    S: int = 64
    c: float = 1.0
    seed: int | None = None  # None: deterministic low-discrepancy pattern

    def __post_init__(self):
        if not self.t0 > 0:
            raise ValueError("t0 must be positive")
        if not 0 < self.rho < 1:
            raise ValueError("rho must lie in (0, 1)")
        if self.S < 1 or self.K < 0:
            raise ValueError("need S >= 1 and K >= 0")
        if not self.c > 0:
            raise ValueError("c must be positive")

    def steps(self) -> list[float]:
        return [self.t0 * self.rho**k for k in range(self.K + 1)]


@dataclass(frozen=True)
class TangentSchedule:
    """t_k = 2**-k for k in [k_min, k_max]; search box radius sigma0 * t_k."""

    k_min: int = 4
    k_max: int = 24
    sigma0: float = 0.5
    eps_ref: float = 1e-4
    rho_rel: float = 0.1  # rho_ref = rho_rel * |v| + rho_abs
    rho_abs: float = 1e-3
    resolution: float = 1e-9  # steps with t^2/2 below resolution*(1+|x0|+t|u|) are not classified

    def __post_init__(self):
        if self.k_min > self.k_max:
            raise ValueError("k_min must not exceed k_max")
        if not (self.sigma0 > 0 and self.eps_ref > 0):
            raise ValueError("sigma0 and eps_ref must be positive")

    def steps(self) -> list[float]:
        return [2.0**-k for k in range(self.k_min, self.k_max + 1)]


@dataclass(frozen=True)
class RunConfig:
    tol: Tolerances = field(default_factory=Tolerances)
    dd2: Dd2Schedule = field(default_factory=Dd2Schedule)
    tangent: TangentSchedule = field(default_factory=TangentSchedule)
    seed: int = 0
    regularity_samples: int = 24
    efficiency_budget: int = 4096
    mmax: float = 1e3
    soft_regularity: bool = False  # let Supported regularity count toward the violation gate (reported separately)

    def to_json(self) -> dict:
        return asdict(self)
