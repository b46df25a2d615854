"""Acceptance suite: each test checks one criterion at its stated tolerance and time limit."""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from voptkkt import expr as ex
from voptkkt.config import RunConfig
from voptkkt.efficiency import falsify_geoffrion
from voptkkt.firstorder import critical_cone, fritz_john, linearizing_cone, strong_fkkt
from voptkkt.model import analyze_point, direction_active_set
from voptkkt.pipeline import run_pipeline
from voptkkt.polyhedra import Polyhedron, Row, motzkin_alternative, slater_alternative, tucker_alternative
from voptkkt.regularity import RegStatus, check_direct
from voptkkt.report import dumps
from voptkkt.secondorder import check_sskkt, find_lex_solution, second_linearizing_set, second_order_data
from voptkkt.subdiff2 import Dd2Registry, Source, sampled_dd2, upper_dd2
from voptkkt.tangent import TangentStatus, tangent2_exact, tangent2_membership
from conftest import CORPUS, EXTRA_EXPRESSIONS, corpus_expressions, corpus_problem
from oracles import dual_feasible, primal_feasible, random_matrix, satisfies
from polytools import random_polyhedron_query

R10 = math.sqrt(10)


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


@pytest.mark.criterion(1, "curvature interval of the piecewise objective")
def test_curvature_interval():
    f1 = corpus_problem("oscillating").function("f1").expr
    with Timer() as t:
        est = sampled_dd2(f1, [0, 0], [1, 0])
    assert abs(est.upper - (4 + R10)) <= 1e-2
    assert abs(est.lower - (4 - R10)) <= 1e-2
    assert t.elapsed < 5


@pytest.mark.criterion(2, "pipeline on the two-objective piecewise example")
def test_piecewise_example_pipeline():
    P = corpus_problem("oscillating")
    with Timer() as t:
        report = run_pipeline(P, [0, 0])
        pa = analyze_point(P, [0, 0])
        K = critical_cone(pa)
        sod = second_order_data(P, pa, [1, 0])
        L2 = second_linearizing_set(sod)
        sk = check_sskkt(sod)
    assert K.cone.equivalent(Polyhedron(2, [Row.make((0, 1), "EQ", 0)]))
    assert L2.is_empty()
    assert sk.found and sk.certificate.lam == (1, 1) and sk.certificate.mu == (0,)
    by_u = {tuple(d["u"]): d for d in report["result"]["directions"]}
    assert by_u[(1, 0)]["sskkt"]["certificate"]["lambda"] == [1, 1]
    assert by_u[(1, 0)]["sskkt"]["certificate"]["mu"] == [0]
    assert by_u[(1, 0)]["L2"]["empty"] is True
    assert report["result"]["classification"] == "Consistent"
    assert t.elapsed < 10


@pytest.mark.criterion(3, "three-objective example: cones, multipliers, regularity, trade-offs")
def test_three_objective_example():
    P = corpus_problem("threeobj")
    with Timer() as t:
        pa = analyze_point(P, [0, 0])
        L = linearizing_cone(pa)
        K = critical_cone(pa)
        sod = second_order_data(P, pa, [0, 0])
        sk = check_sskkt(sod)
        fj = fritz_john(pa)
        lex = find_lex_solution(P, pa)
        asorc = check_direct(P, pa, sod, "ASORC")
        gasorc = check_direct(P, pa, sod, "GASORC")
        geo = falsify_geoffrion(P, [0, 0], mmax=1e3)
    assert L.equivalent(Polyhedron(2, [Row.make((1, 0), "EQ", 0), Row.make((0, 1), "LE", 0)]))
    assert K.is_trivial and K.cone.equivalent(Polyhedron(2, [Row.make((1, 0), "EQ", 0), Row.make((0, 1), "EQ", 0)]))
    assert not sk.found
    assert fj.lam[0] == 0 and fj.lam[1] == fj.lam[2] > 0
    assert lex.found and lex.u == (0, 0) and lex.v == (0, -1)
    assert asorc.status is RegStatus.COUNTEREXAMPLE
    assert asorc.counterexample == (0.0, -1.0) and asorc.counterexample_set == "Q1"
    assert asorc.trace["status"] == TangentStatus.REFUTED.value
    assert gasorc.status is RegStatus.SUPPORTED
    assert gasorc.samples >= 20 and gasorc.verified == gasorc.samples * P.l and gasorc.inconclusive == 0
    assert geo.status == "UnboundedTradeoff"
    assert any(r >= 1e3 and a <= 1e-3 for a, r in geo.growth_table)
    assert t.elapsed < 20


def _dual_residual_zero(blocks, parts, d):
    for c in range(d):
        if sum(y * row[c] for name, rows in blocks.items() for y, row in zip(parts[name], rows)) != 0:
            return False
    return True


@pytest.mark.criterion(4, "theorems of the alternative against the elimination oracle")
def test_alternatives_against_oracle():
    rng = np.random.default_rng(2024)
    with Timer() as t:
        for k in range(200):
            d = int(rng.integers(1, 5))
            A, B, C, D = (random_matrix(rng, int(rng.integers(0, 3)), d) for _ in range(4))
            theorem = ("MOTZKIN", "TUCKER", "SLATER")[k % 3]
            if theorem == "MOTZKIN":
                A = A or random_matrix(rng, 1, d)
                out = motzkin_alternative(A, B, C, dim=d)
                oA, oB, oC, oD = A, [], B, C
                primal = primal_feasible(oA, oB, oC, oD, d)
                dual = dual_feasible(oA, oB, oC, oD, d, b_positive=False)
                blocks = {"y1": A, "y2": B, "y3": C}
            elif theorem == "TUCKER":
                B = B or random_matrix(rng, 1, d)
                out = tucker_alternative(B, C, D, dim=d)
                oA, oB, oC, oD = [], B, C, D
                primal = primal_feasible(oA, oB, oC, oD, d)
                dual = dual_feasible(oA, oB, oC, oD, d, b_positive=True)
                blocks = {"y2": B, "y3": C, "y4": D}
            else:
                out = slater_alternative(A, B, C, D, dim=d)
                oA, oB, oC, oD = A, B, C, D
                primal = primal_feasible(oA, oB, oC, oD, d)
                dual = (bool(B) and dual_feasible(oA, oB, oC, oD, d, b_positive=True)) or \
                    dual_feasible(oA, oB, oC, oD, d, b_positive=False)
                blocks = {"y1": A, "y2": B, "y3": C, "y4": D}
            assert primal != dual, (theorem, A, B, C, D)
            assert (out.branch == "PRIMAL") == primal
            if out.branch == "PRIMAL":
                x = out.witness
                rows = [(a, "LT", 0) for a in oA] + [(b, "LE", 0) for b in oB] + \
                    [(c, "LE", 0) for c in oC] + [(e, "EQ", 0) for e in oD]
                assert satisfies(rows, x)
                if oB:
                    assert any(sum(Fraction(bi) * xi for bi, xi in zip(b, x)) < 0 for b in oB)
            else:
                assert _dual_residual_zero(blocks, out.parts, d)
    assert t.elapsed < 30


@pytest.mark.criterion(5, "forward-mode gradients against central differences")
def test_gradients_against_differences():
    rng = np.random.default_rng(99)
    with Timer() as t:
        exprs = [(label, e, n) for label, e, n, _ in corpus_expressions()]
        exprs += [(text, ex.parse(text, [f"x{i + 1}" for i in range(n)]), n) for text, n in EXTRA_EXPRESSIONS]
        for label, e, n in exprs:
            X = rng.uniform(-2, 2, size=(100, n))
            G = ex.grad_batch(e, X)
            h = 1e-6
            for i in range(n):
                D = np.zeros(n)
                D[i] = h
                fd = (ex.eval_batch(e, X + D) - ex.eval_batch(e, X - D)) / (2 * h)
                err = np.abs(G[:, i] - fd)
                assert np.all(err <= np.maximum(1e-6 * np.abs(G[:, i]), 1e-8)), label
    assert t.elapsed < 5


@pytest.mark.criterion(6, "sampled tangent tester against exact polyhedral sets")
def test_tangent_tester_against_exact():
    rng = np.random.default_rng(6)
    contradictions = 0
    with Timer() as t:
        for _ in range(50):
            for _ in range(3):
                P, s, poly, x0, u, v = random_polyhedron_query(rng)
                exact = tangent2_exact(poly, x0, u, v)
                got = tangent2_membership(P, s, x0, u, v).status
                if got is not TangentStatus.INCONCLUSIVE and got is not exact:
                    contradictions += 1
    assert contradictions == 0
    assert t.elapsed < 30


@pytest.mark.criterion(7, "consistency identities across the corpus")
def test_consistency_identities():
    with Timer() as t:
        for name, x0 in CORPUS:
            P = corpus_problem(name)
            reg = Dd2Registry.from_overrides(P.overrides)
            pa = analyze_point(P, x0)
            zero = [0.0] * P.n
            sod = second_order_data(P, pa, zero, RunConfig(), reg)
            sk, sf = check_sskkt(sod), strong_fkkt(pa)
            assert sk.found == (sf is not None)
            if sf is not None:
                assert sk.certificate.lam == sf.lam
            assert second_linearizing_set(sod).polyhedron.equivalent(linearizing_cone(pa))
            assert direction_active_set(pa, zero) == pa.active
            for fn in P.objectives + P.constraints:
                est = upper_dd2(fn.expr, x0, zero, fn_id=fn.name, registry=reg)
                assert (est.upper, est.lower, est.source) == (0.0, 0.0, Source.EXACT)
    assert t.elapsed < 10


@pytest.mark.criterion(8, "byte-identical pipeline reports across runs")
def test_determinism():
    P = corpus_problem("threeobj")
    first = dumps(run_pipeline(P, [0, 0], config=RunConfig()))
    second = dumps(run_pipeline(P, [0, 0], config=RunConfig()))
    assert first == second
