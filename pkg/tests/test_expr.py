import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from voptkkt import expr as ex
from conftest import EXTRA_EXPRESSIONS, corpus_expressions

X2 = ["x1", "x2"]
F1_TEXT = "piecewise(x1 == 0, x2^2 + x2, 2*x1^2 + x2^2 + x2 + x1^2*sin(ln(abs(x1))))"


def all_expressions():
    out = [(label, e, n) for label, e, n, _ in corpus_expressions()]
    for k, (text, n) in enumerate(EXTRA_EXPRESSIONS):
        out.append((f"extra{k}", ex.parse(text, [f"x{i + 1}" for i in range(n)]), n))
    return out


def central_differences(e, x, h=1e-6):
    g = np.empty_like(x)
    for i in range(x.size):
        d = np.zeros_like(x)
        d[i] = h
        g[i] = (ex.evaluate(e, x + d) - ex.evaluate(e, x - d)) / (2 * h)
    return g


class TestParse:
    def test_sum_root(self):
        e = ex.parse("x2^2 + x2", X2)
        assert isinstance(e, ex.BinOp) and e.op == "+"
        assert e.right == ex.Var(1, "x2")

    def test_piecewise_root(self):
        e = ex.parse(F1_TEXT, X2)
        assert isinstance(e, ex.Piecewise)
        assert isinstance(e.cond, ex.Compare) and e.cond.op == "=="

    def test_incomplete_reports_position(self):
        with pytest.raises(ex.ExpressionSyntaxError) as info:
            ex.parse("x1 +", X2)
        assert info.value.position == 4

    def test_unknown_variable(self):
        with pytest.raises(ex.UnknownVariableError) as info:
            ex.parse("x1 + y", X2)
        assert info.value.name == "y"

    @pytest.mark.parametrize("text", ["x1 ** 2", "sin x1", "piecewise(x1, 1, 2)", "(x1", "1 2", "x1 $ 2", ""])
    def test_malformed(self, text):
        with pytest.raises(ex.ExpressionError):
            ex.parse(text, X2)

    def test_whitespace_insensitive(self):
        assert ex.parse(" x1*x2 +  sin( x1 ) ", X2) == ex.parse("x1*x2+sin(x1)", X2)

    def test_unary_minus_binds_looser_than_power(self):
        assert ex.evaluate(ex.parse("-x1^2", X2), [3.0, 0.0]) == -9.0

    @pytest.mark.parametrize("label,e,n", all_expressions(), ids=lambda v: v if isinstance(v, str) else "")
    def test_round_trip(self, label, e, n):
        names = [f"x{i + 1}" for i in range(n)]
        assert ex.parse(ex.to_text(e), names) == e


class TestEvaluate:
    def test_piecewise_then_branch(self):
        assert ex.evaluate(ex.parse(F1_TEXT, X2), [0.0, 0.5]) == pytest.approx(0.75, abs=1e-15)

    def test_constant(self):
        e = ex.parse("3", X2)
        assert ex.evaluate(e, [7.0, -2.0]) == 3.0
        assert np.all(ex.grad(e, [7.0, -2.0]) == 0.0)

    def test_abs_composite(self):
        e = ex.parse("-x1 - x1*abs(x1) + x2^2", X2)
        assert ex.evaluate(e, [1.0, 0.0]) == -2.0

    def test_domain_error_on_taken_branch(self):
        e = ex.parse("ln(x1)", X2)
        with pytest.raises(ex.DomainError):
            ex.evaluate(e, [0.0, 1.0])
        with pytest.raises(ex.DomainError):
            ex.evaluate(ex.parse("x1^0.5", X2), [-1.0, 0.0])

    def test_untaken_branch_is_not_evaluated(self):
        e = ex.parse(F1_TEXT, X2)
        assert np.isfinite(ex.evaluate(e, [0.0, 0.0]))

    def test_batch_matches_pointwise(self, rng):
        e = ex.parse(F1_TEXT, X2)
        X = rng.uniform(-1, 1, size=(20, 2))
        X[::4, 0] = 0.0
        vals = ex.eval_batch(e, X)
        assert vals == pytest.approx([ex.evaluate(e, x) for x in X], abs=0)

    def test_boolean_conditions(self):
        e = ex.parse("piecewise(x1 > 0 and x2 > 0 or x1 == 5, 1, 0)", X2)
        assert [ex.evaluate(e, p) for p in ([1, 1], [1, -1], [5, -1])] == [1, 0, 1]


class TestGrad:
    def test_piecewise_gradient(self):
        e = ex.parse(F1_TEXT, X2)
        assert np.array_equal(ex.grad(e, [0.0, 0.0]), [0.0, 1.0])

    def test_linear_constraint(self, rng):
        e = ex.parse("-x2", X2)
        for x in rng.normal(size=(5, 2)):
            assert np.array_equal(ex.grad(e, x), [0.0, -1.0])

    def test_abs_at_zero_uses_zero_sign(self):
        e = ex.parse("x1*abs(x1)", X2)
        assert np.array_equal(ex.grad(e, [0.0, 0.0]), [0.0, 0.0])

    def test_directional_derivative(self, rng):
        e = ex.parse("sqrt(1 + x1^2) * cos(x2)", X2)
        X = rng.normal(size=(10, 2))
        d = np.array([0.3, -1.2])
        vals, dd = ex.value_and_dirderiv_batch(e, X, d)
        assert dd == pytest.approx(ex.grad_batch(e, X) @ d, rel=1e-14, abs=1e-15)
        assert vals == pytest.approx(ex.eval_batch(e, X), rel=0, abs=0)

    @pytest.mark.parametrize("label,e,n", all_expressions(), ids=lambda v: v if isinstance(v, str) else "")
    def test_against_finite_differences(self, label, e, n, rng):
        for x in rng.uniform(-2, 2, size=(100, n)):
            g = ex.grad(e, x)
            fd = central_differences(e, x)
            assert np.all(np.abs(g - fd) <= np.maximum(1e-6 * np.abs(g), 1e-8)), (x, g, fd)

    @given(st.floats(-5, 5), st.floats(-5, 5))
    @settings(max_examples=50, deadline=None)
    def test_product_rule(self, a, b):
        e = ex.parse("x1^2 * exp(x2)", X2)
        g = ex.grad(e, [a, b])
        assert g[0] == pytest.approx(2 * a * math.exp(b), rel=1e-12, abs=1e-300)
        assert g[1] == pytest.approx(a * a * math.exp(b), rel=1e-12, abs=1e-300)


class TestSeams:
    @pytest.mark.parametrize("label,e,n", [t for t in all_expressions() if isinstance(t[1], ex.Piecewise)],
                             ids=lambda v: v if isinstance(v, str) else "")
    def test_piecewise_continuity(self, label, e, n, rng):
        # every corpus seam is a coordinate hyperplane through 0
        for _ in range(20):
            x = rng.uniform(-1, 1, size=n)
            for k in range(n):
                seam = x.copy()
                seam[k] = 0.0
                for side in (1e-10, -1e-10):
                    near = seam.copy()
                    near[k] = side
                    assert abs(ex.evaluate(e, near) - ex.evaluate(e, seam)) <= 1e-8
                    assert np.all(np.abs(ex.grad(e, near) - ex.grad(e, seam)) <= 1e-8)
