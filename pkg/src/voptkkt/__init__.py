"""Second-order KKT checks for C^{1,1} vector optimization problems."""

from .config import Dd2Schedule, RunConfig, TangentSchedule, Tolerances
from .model import Problem, analyze_point, load_problem
from .pipeline import run_pipeline

__all__ = [
    "Dd2Schedule",
    "Problem",
    "RunConfig",
    "TangentSchedule",
    "Tolerances",
    "analyze_point",
    "load_problem",
    "run_pipeline",
]
