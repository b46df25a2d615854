from fractions import Fraction

import numpy as np
import pytest

from voptkkt.firstorder import (
    MultiplierCertificate,
    check_lam_mu,
    critical_cone,
    find_descent_direction,
    fritz_john,
    linearizing_cone,
    strong_fkkt,
)
from voptkkt.model import PointAnalysis, analyze_point
from voptkkt.polyhedra import Polyhedron, Row
from conftest import CORPUS, corpus_problem
from oracles import EQ, LE, LT, fm_feasible


def synthetic(f_grads, g_grads, active):
    f_grads = np.asarray(f_grads, dtype=float)
    g_grads = np.asarray(g_grads, dtype=float).reshape(-1, f_grads.shape[1])
    n = f_grads.shape[1]
    return PointAnalysis(np.zeros(n), True, np.zeros(len(f_grads)), np.zeros(len(g_grads)),
                         f_grads, g_grads, tuple(active), 1e-8)


def random_analysis(rng):
    n = int(rng.integers(1, 5))
    l = int(rng.integers(1, 4))
    m = int(rng.integers(0, 3))
    F = rng.integers(-3, 4, size=(l, n))
    G = rng.integers(-3, 4, size=(m, n))
    active = [j for j in range(m) if rng.random() < 0.7]
    return synthetic(F, G, active)


def oracle_descent(pa):
    rows = [(a, LE, 0) for a in pa.f_grads_q()] + [(pa.g_grads_q()[j], LE, 0) for j in pa.active]
    return any(fm_feasible(rows + [(a, LT, 0)], pa.n) for a in pa.f_grads_q())


def oracle_multipliers(pa, lam_positive):
    """lam (>0 or >=0 and nonzero), mu >= 0 on the active set, stationarity."""
    fq, gq = pa.f_grads_q(), pa.g_grads_q()
    l, s = len(fq), len(pa.active)
    dim = l + s
    rows = []
    for c in range(pa.n):
        rows.append((tuple([fq[i][c] for i in range(l)] + [gq[j][c] for j in pa.active]), EQ, 0))
    for k in range(dim):
        e = [0] * dim
        e[k] = -1
        rows.append((tuple(e), LT if (lam_positive and k < l) else LE, 0))
    if not lam_positive:
        rows.append((tuple([-1] * l + [0] * s), LT, 0))
    return fm_feasible(rows, dim)


class TestCorpusProblems:
    def test_oscillating(self, oscillating):
        pa = analyze_point(oscillating, [0, 0])
        K = critical_cone(pa)
        assert K.cone.equivalent(Polyhedron.from_json(2, [{"coeffs": [0, 1], "rel": "EQ", "rhs": 0}]))
        assert sorted(K.generators) == [(-1, 0), (1, 0)]
        sf = strong_fkkt(pa)
        assert sf.lam == (1, 1) and sf.mu == (0,)
        assert find_descent_direction(pa) is None

    def test_threeobj_cones(self, threeobj):
        pa = analyze_point(threeobj, [0, 0])
        L = linearizing_cone(pa)
        expected = Polyhedron(2, [Row.make((1, 0), "EQ", 0), Row.make((0, 1), "LE", 0)])
        assert L.equivalent(expected)
        K = critical_cone(pa)
        assert K.is_trivial and K.cone.contains((0, 0)) and not K.cone.contains((0, -1))

    def test_threeobj_multipliers(self, threeobj):
        pa = analyze_point(threeobj, [0, 0])
        assert strong_fkkt(pa) is None
        fj = fritz_john(pa)
        assert fj.lam[0] == 0 and fj.lam[1] == fj.lam[2] > 0
        d = find_descent_direction(pa)
        assert d is not None
        fq = pa.f_grads_q()
        vals = [sum(a * b for a, b in zip(g, d)) for g in fq]
        assert all(v <= 0 for v in vals) and any(v < 0 for v in vals)

    def test_json(self, oscillating):
        data = strong_fkkt(analyze_point(oscillating, [0, 0])).to_json()
        assert data["lambda"] == [1, 1] and data["mu"] == [0] and data["kind"] == "SFKKT"


class TestDuality:
    def test_descent_versus_strong_multipliers(self, rng):
        """Tucker pairing: a descent direction exists iff no multipliers with lam > 0."""
        for _ in range(100):
            pa = random_analysis(rng)
            d, sf = find_descent_direction(pa), strong_fkkt(pa)
            assert (d is None) != (sf is None)
            assert (d is not None) == oracle_descent(pa)
            assert (sf is not None) == oracle_multipliers(pa, lam_positive=True)

    def test_strict_descent_versus_fritz_john(self, rng):
        """Motzkin pairing: all objectives strictly decrease iff no lam >= 0, lam != 0."""
        for _ in range(100):
            pa = random_analysis(rng)
            rows = [(a, LT, 0) for a in pa.f_grads_q()] + [(pa.g_grads_q()[j], LE, 0) for j in pa.active]
            assert fm_feasible(rows, pa.n) != oracle_multipliers(pa, lam_positive=False)

    def test_certificates_are_exact(self, rng):
        for _ in range(100):
            pa = random_analysis(rng)
            for cert in (fritz_john(pa), strong_fkkt(pa)):
                if cert is not None:
                    assert all(v == 0 for v in cert.stationarity)
                    assert check_lam_mu(pa, cert)

    def test_check_rejects_bad_certificates(self):
        pa = synthetic([[0, 1], [0, -1]], [[0, -1], [1, 0]], [0])
        one = Fraction(1)
        assert check_lam_mu(pa, MultiplierCertificate("SFKKT", (one, one), (Fraction(0), Fraction(0)), ()))
        assert not check_lam_mu(pa, MultiplierCertificate("SFKKT", (one, 2 * one), (Fraction(0), Fraction(0)), ()))
        assert not check_lam_mu(pa, MultiplierCertificate("SFKKT", (one, one), (Fraction(0), one), ()))


@pytest.mark.parametrize("name,x0", CORPUS)
def test_critical_inside_linearizing(name, x0):
    pa = analyze_point(corpus_problem(name), x0)
    assert critical_cone(pa).cone.subset_of(linearizing_cone(pa))
