from pathlib import Path

import numpy as np
import pytest

from voptkkt.model import load_problem

ROOT = Path(__file__).resolve().parents[1]
PROBLEMS = ROOT / "problems"

# (file stem, candidate point) for every corpus problem
CORPUS = [
    ("oscillating", (0.0, 0.0)),
    ("oscillating_override", (0.0, 0.0)),
    ("threeobj_trivial", (0.0, 0.0)),
    ("threeobj", (0.0, 0.0)),
    ("circle", (-1.0, 0.0)),
    ("bowl3", (0.5, 0.0, 0.0)),
]

# expressions used only by the differentiation tests, with a sampling box
EXTRA_EXPRESSIONS = [
    ("sqrt(1 + x1^2) * cos(x2)", 2),
    ("exp(-x1^2) / (2 + sin(x2))", 2),
    ("x1 * abs(x1) - x2^3 + 3", 2),
    ("(x1^2 + 1)^1.5 - ln(2 + x2^2)", 2),
    ("piecewise(x1 > 0 and x2 > 0, x1^2 * x2^2, 0)", 2),
    ("x1 * x2 * x3 - 2 / (1 + x3^2)", 3),
]


def problem_path(name: str) -> Path:
    return PROBLEMS / f"{name}.json"


def corpus_problem(name: str):
    return load_problem(problem_path(name))


def corpus_expressions():
    """(label, expression, n) for every objective and constraint in the corpus."""
    out = []
    for name, _ in CORPUS:
        P = corpus_problem(name)
        for fn in P.objectives + P.constraints:
            out.append((f"{name}.{fn.name}", fn.expr, P.n, fn.text))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def oscillating():
    return corpus_problem("oscillating")


@pytest.fixture(scope="session")
def oscillating_override():
    return corpus_problem("oscillating_override")


@pytest.fixture(scope="session")
def threeobj():
    return corpus_problem("threeobj")


@pytest.fixture(scope="session")
def threeobj_trivial():
    return corpus_problem("threeobj_trivial")


# ---------------------------------------------------------------------------
# One pass/fail line per acceptance criterion at the end of the run

_ACCEPTANCE: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    if report.when == "call" or (report.when == "setup" and report.failed):
        _ACCEPTANCE[number] = (title, "PASS" if report.passed else "FAIL", report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, status, duration = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {status}  {title}  ({duration:.2f} s)")
