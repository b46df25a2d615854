import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from voptkkt import expr as ex
from voptkkt.config import Dd2Schedule
from voptkkt.subdiff2 import (
    Dd2Estimate,
    Dd2Registry,
    InvalidInterval,
    OverrideConflict,
    Source,
    sampled_dd2,
    scaling_check,
    sphere_pattern,
    taylor_check,
    upper_dd2,
)
from conftest import CORPUS, corpus_problem

X2 = ["x1", "x2"]
F1 = "piecewise(x1 == 0, x2^2 + x2, 2*x1^2 + x2^2 + x2 + x1^2*sin(ln(abs(x1))))"
R10 = math.sqrt(10)


class TestSpherePattern:
    @pytest.mark.parametrize("n", [1, 2, 3, 5])
    def test_unit_rows(self, n):
        W = sphere_pattern(n, 16)
        assert W.shape == (16, n)
        assert np.allclose(np.linalg.norm(W, axis=1), 1.0)

    @pytest.mark.parametrize("n,seed", [(2, None), (3, None), (3, 7)])
    def test_nested(self, n, seed):
        assert np.array_equal(sphere_pattern(n, 8, seed), sphere_pattern(n, 32, seed)[:8])


class TestEstimate:
    def test_oscillating_interval(self):
        est = sampled_dd2(ex.parse(F1, X2), [0, 0], [1, 0])
        assert est.source is Source.SAMPLED and est.one_sided
        assert est.upper == pytest.approx(4 + R10, abs=1e-2)
        assert est.lower == pytest.approx(4 - R10, abs=1e-2)

    def test_smooth_quadratic_is_exact(self):
        est = sampled_dd2(ex.parse("x1^2 + 3*x2^2", X2), [0.3, -1], [1, 1])
        assert est.upper == pytest.approx(8.0, abs=1e-6)
        assert est.lower == pytest.approx(8.0, abs=1e-6)

    def test_zero_direction_and_affine(self):
        e = ex.parse(F1, X2)
        assert upper_dd2(e, [0, 0], [0, 0]) == Dd2Estimate(0.0, 0.0, Source.EXACT)
        est = sampled_dd2(ex.parse("3*x1 - x2 + 1", X2), [1, 1], [1, 2])
        assert (est.upper, est.lower, est.source) == (0.0, 0.0, Source.EXACT)

    def test_invalid_interval(self):
        with pytest.raises(InvalidInterval):
            Dd2Estimate(0.0, 1.0, Source.OVERRIDE)

    def test_trace_is_monotone(self):
        est = sampled_dd2(ex.parse(F1, X2), [0, 0], [1, 0])
        ups = [u for _, u, _ in est.trace]
        los = [lo for _, _, lo in est.trace]
        assert ups == sorted(ups) and los == sorted(los, reverse=True)

    @pytest.mark.parametrize("bigger", [Dd2Schedule(K=24), Dd2Schedule(S=128), Dd2Schedule(K=24, S=96)])
    def test_monotone_refinement(self, bigger):
        e = ex.parse(F1, X2)
        base = sampled_dd2(e, [0, 0], [1, 0], Dd2Schedule())
        more = sampled_dd2(e, [0, 0], [1, 0], bigger)
        assert more.upper >= base.upper and more.lower <= base.lower

    # both functions look the same at every scale around the origin
    @pytest.mark.parametrize("text", [F1, "x1*abs(x1) + x2^2"])
    @pytest.mark.parametrize("alpha", [-2.0, 0.5, 3.0])
    def test_scaling(self, text, alpha):
        assert scaling_check(ex.parse(text, X2), [0, 0], [1, -1], alpha) < 1e-2 * alpha**2

    @given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
    @settings(max_examples=25, deadline=None)
    def test_lower_below_upper(self, a, b, c, d):
        est = upper_dd2(ex.parse("x1*abs(x1) + cos(x2)", X2), [a, b], [c, d])
        assert est.lower <= est.upper


class TestOverrides:
    def test_registry_match_and_scaling(self):
        reg = Dd2Registry()
        reg.register("f1", [0, 0], [1, 0], 2.0, 1.0)
        assert reg.lookup("f1", [0, 0], [1, 0]) == (2.0, 1.0)
        assert reg.lookup("f1", [0, 0], [-2, 0]) == (8.0, 4.0)
        assert reg.lookup("f1", [0, 0], [1, 1]) is None
        assert reg.lookup("f2", [0, 0], [1, 0]) is None
        with pytest.raises(InvalidInterval):
            reg.register("f1", [0, 0], [1, 0], 0.0, 1.0)

    def test_override_used(self, oscillating_override):
        reg = Dd2Registry.from_overrides(oscillating_override.overrides)
        f1 = oscillating_override.function("f1")
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            est = upper_dd2(f1.expr, [0, 0], [1, 0], fn_id="f1", registry=reg)
        assert est.source is Source.OVERRIDE
        assert (est.upper, est.lower) == (4 + R10, 4 - R10)

    def test_conflicting_override_warns(self):
        reg = Dd2Registry()
        reg.register("f1", [0, 0], [1, 0], 5.0, 4.0)
        with pytest.warns(OverrideConflict):
            est = upper_dd2(ex.parse(F1, X2), [0, 0], [1, 0], fn_id="f1", registry=reg)
        assert est.warnings and est.upper == 5.0


class TestTaylor:
    @pytest.mark.parametrize("name", sorted({n for n, _ in CORPUS}))
    def test_corpus_functions(self, name, rng):
        P = corpus_problem(name)
        for fn in P.objectives + P.constraints:
            bad = 0
            for _ in range(10):
                a = rng.uniform(-1, 1, size=P.n)
                d = rng.normal(size=P.n)
                b = a + 1e-2 * rng.uniform(0.1, 1) * d / np.linalg.norm(d)
                res = taylor_check(fn.expr, a, b, Dd2Schedule(K=10, S=16))
                assert res.low <= res.high
                bad += not res.consistent
            # inconsistencies are diagnostics; smooth corpus functions never produce them
            assert bad == 0, fn.name
