"""Scalar expressions over named variables.

Expressions are parsed into an immutable AST and evaluated on batches of
points with numpy. Gradients and directional derivatives use forward-mode
dual numbers carried alongside the values, one tangent column per seed.

Piecewise nodes evaluate each branch only on the lanes that select it, so a
domain error (``ln(0)`` and friends) is raised only when it is reached on the
branch that is actually taken.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

FUNCTIONS = ("sin", "cos", "exp", "ln", "sqrt", "abs")
COMPARISONS = ("==", "<=", "<", ">=", ">")


class ExpressionError(ValueError):
    pass


class ExpressionSyntaxError(ExpressionError):
    def __init__(self, position: int, message: str):
        super().__init__(f"{message} (at position {position})")
        self.position = position
        self.message = message


class UnknownVariableError(ExpressionError):
    def __init__(self, name: str, position: int = -1):
        super().__init__(f"unknown variable {name!r}")
        self.name = name
        self.position = position


class DomainError(ExpressionError):
    pass


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    index: int
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expression"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Pow:
    base: "Expression"
    exponent: "Expression"


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Expression"


@dataclass(frozen=True)
class Compare:
    op: str
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class BoolOp:
    op: str  # "and" | "or"
    left: "Condition"
    right: "Condition"


@dataclass(frozen=True)
class Piecewise:
    cond: "Condition"
    then: "Expression"
    other: "Expression"


Expression = Union[Const, Var, Neg, BinOp, Pow, Call, Piecewise]
Condition = Union[Compare, BoolOp]


# ---------------------------------------------------------------------------
# Parsing

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>==|<=|>=|<|>|\+|-|\*|/|\^|\(|\)|,)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # num | ident | op | end
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExpressionSyntaxError(pos, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(_Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, variables: Sequence[str]):
        self.tokens = _tokenize(text)
        self.i = 0
        self.var_index = {name: k for k, name in enumerate(variables)}

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def _at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("op", "ident") and t.text == text

    def _expect(self, text: str) -> _Token:
        if not self._at(text):
            self._fail(f"expected {text!r}")
        t = self.tok
        self.i += 1
        return t

    def _fail(self, message: str):
        t = self.tok
        found = "end of input" if t.kind == "end" else repr(t.text)
        raise ExpressionSyntaxError(t.pos, f"{message}, found {found}")

    def parse(self) -> Expression:
        e = self.expr()
        if self.tok.kind != "end":
            self._fail("unexpected trailing input")
        return e

    def expr(self) -> Expression:
        node = self.term()
        while self._at("+") or self._at("-"):
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expression:
        node = self.factor()
        while self._at("*") or self._at("/"):
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Expression:
        # unary minus binds looser than ^ so that -x^2 == -(x^2)
        if self._at("-"):
            self.i += 1
            return Neg(self.factor())
        base = self.atom()
        if self._at("^"):
            self.i += 1
            return Pow(base, self.factor())
        return base

    def atom(self) -> Expression:
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return Const(float(t.text))
        if t.kind == "ident":
            if t.text == "piecewise":
                return self._piecewise()
            if t.text in FUNCTIONS:
                self.i += 1
                self._expect("(")
                arg = self.expr()
                self._expect(")")
                return Call(t.text, arg)
            if t.text in ("and", "or"):
                self._fail("expected an expression")
            if t.text not in self.var_index:
                raise UnknownVariableError(t.text, t.pos)
            self.i += 1
            return Var(self.var_index[t.text], t.text)
        if self._at("("):
            self.i += 1
            e = self.expr()
            self._expect(")")
            return e
        self._fail("expected an expression")

    def _piecewise(self) -> Piecewise:
        self.i += 1
        self._expect("(")
        cond = self.condition()
        self._expect(",")
        then = self.expr()
        self._expect(",")
        other = self.expr()
        self._expect(")")
        return Piecewise(cond, then, other)

    def condition(self) -> Condition:
        node = self.conjunction()
        while self._at("or"):
            self.i += 1
            node = BoolOp("or", node, self.conjunction())
        return node

    def conjunction(self) -> Condition:
        node = self.comparison()
        while self._at("and"):
            self.i += 1
            node = BoolOp("and", node, self.comparison())
        return node

    def comparison(self) -> Condition:
        if self._at("("):
            # a parenthesised condition, or an expression that starts with "("
            save = self.i
            try:
                self.i += 1
                inner = self.condition()
                self._expect(")")
                if not (self.tok.kind == "op" and self.tok.text in COMPARISONS + ("+", "-", "*", "/", "^")):
                    return inner
            except ExpressionSyntaxError:
                pass
            self.i = save
        left = self.expr()
        if not (self.tok.kind == "op" and self.tok.text in COMPARISONS):
            self._fail("expected a comparison operator")
        op = self.tok.text
        self.i += 1
        return Compare(op, left, self.expr())


def parse(text: str, variables: Sequence[str]) -> Expression:
    """Parse ``text`` into an expression over ``variables`` (x1..xn order)."""
    return _Parser(text, variables).parse()


# ---------------------------------------------------------------------------
# Printing

def to_text(node) -> str:
    """Canonical text form; ``parse(to_text(e)) == e`` for parsed trees."""
    if isinstance(node, Const):
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_text(node.arg)})"
    if isinstance(node, BinOp):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    if isinstance(node, Pow):
        return f"({to_text(node.base)}^{to_text(node.exponent)})"
    if isinstance(node, Call):
        return f"{node.fn}({to_text(node.arg)})"
    if isinstance(node, Piecewise):
        return f"piecewise({to_text(node.cond)}, {to_text(node.then)}, {to_text(node.other)})"
    if isinstance(node, Compare):
        return f"{to_text(node.left)} {node.op} {to_text(node.right)}"
    if isinstance(node, BoolOp):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# Structural queries

def variables_used(node) -> set[int]:
    if isinstance(node, Const):
        return set()
    if isinstance(node, Var):
        return {node.index}
    if isinstance(node, (Neg, Call)):
        return variables_used(node.arg)
    if isinstance(node, (BinOp, Compare, BoolOp)):
        return variables_used(node.left) | variables_used(node.right)
    if isinstance(node, Pow):
        return variables_used(node.base) | variables_used(node.exponent)
    if isinstance(node, Piecewise):
        return variables_used(node.cond) | variables_used(node.then) | variables_used(node.other)
    raise TypeError(f"not an expression node: {node!r}")


def is_constant(node) -> bool:
    return not variables_used(node)


def is_affine(node) -> bool:
    """Conservative AST scan: True only if the expression is affine in x."""
    if is_constant(node):
        return True
    if isinstance(node, Var):
        return True
    if isinstance(node, Neg):
        return is_affine(node.arg)
    if isinstance(node, BinOp):
        if node.op in "+-":
            return is_affine(node.left) and is_affine(node.right)
        if node.op == "*":
            return (is_constant(node.left) and is_affine(node.right)) or (
                is_constant(node.right) and is_affine(node.left)
            )
        if node.op == "/":
            return is_constant(node.right) and is_affine(node.left)
    if isinstance(node, Pow):
        return _integer_exponent(node.exponent) == 1 and is_affine(node.base)
    return False


def _integer_exponent(node) -> int | None:
    if isinstance(node, Const) and float(node.value).is_integer():
        return int(node.value)
    if isinstance(node, Neg):
        k = _integer_exponent(node.arg)
        return None if k is None else -k
    return None


# ---------------------------------------------------------------------------
# Batched forward-mode evaluation


class _Dual:
    """Values ``val`` (N,) with tangents ``der`` (N, k); ``der`` may be None."""

    __slots__ = ("val", "der")

    def __init__(self, val, der):
        self.val = val
        self.der = der


def _scale(der, factor):
    return None if der is None else der * factor[:, None]


def _add(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a + b


def _mul(a: _Dual, b: _Dual) -> _Dual:
    return _Dual(a.val * b.val, _add(_scale(a.der, b.val), _scale(b.der, a.val)))


def _check(active, bad, message):
    if np.any(active & bad):
        raise DomainError(message)


def _ev(node, X, seeds, active) -> _Dual:
    n_pts = X.shape[0]
    if isinstance(node, Const):
        return _Dual(np.full(n_pts, float(node.value)), None)
    if isinstance(node, Var):
        der = None if seeds is None else np.broadcast_to(seeds[node.index], (n_pts, seeds.shape[1]))
        return _Dual(X[:, node.index], der)
    if isinstance(node, Neg):
        a = _ev(node.arg, X, seeds, active)
        return _Dual(-a.val, None if a.der is None else -a.der)
    if isinstance(node, BinOp):
        a = _ev(node.left, X, seeds, active)
        b = _ev(node.right, X, seeds, active)
        if node.op == "+":
            return _Dual(a.val + b.val, _add(a.der, b.der))
        if node.op == "-":
            return _Dual(a.val - b.val, _add(a.der, None if b.der is None else -b.der))
        if node.op == "*":
            return _mul(a, b)
        _check(active, b.val == 0, "division by zero")
        val = a.val / b.val
        der = _add(_scale(a.der, 1.0 / b.val), _scale(b.der, -val / b.val))
        return _Dual(val, der)
    if isinstance(node, Pow):
        k = _integer_exponent(node.exponent)
        base = _ev(node.base, X, seeds, active)
        if k is not None:
            return _int_pow(base, k, active)
        e = _ev(node.exponent, X, seeds, active)
        _check(active, base.val <= 0, "non-integer power of a non-positive base")
        log_b = np.log(base.val)
        val = np.exp(e.val * log_b)
        der = _add(_scale(e.der, val * log_b), _scale(base.der, val * e.val / base.val))
        return _Dual(val, der)
    if isinstance(node, Call):
        a = _ev(node.arg, X, seeds, active)
        return _call(node.fn, a, active)
    if isinstance(node, Piecewise):
        mask = _cond(node.cond, X, active)
        t = _ev(node.then, X, seeds, active & mask)
        o = _ev(node.other, X, seeds, active & ~mask)
        val = np.where(mask, t.val, o.val)
        if t.der is None and o.der is None:
            der = None
        else:
            k = seeds.shape[1]
            td = np.zeros((n_pts, k)) if t.der is None else t.der
            od = np.zeros((n_pts, k)) if o.der is None else o.der
            der = np.where(mask[:, None], td, od)
        return _Dual(val, der)
    raise TypeError(f"not an expression node: {node!r}")


def _int_pow(base: _Dual, k: int, active) -> _Dual:
    if k == 0:
        return _Dual(np.ones_like(base.val), None)
    if k < 0:
        _check(active, base.val == 0, "negative power of zero")
        inv = _Dual(1.0 / base.val, _scale(base.der, -1.0 / base.val**2))
        return _int_pow(inv, -k, active)
    result = None
    square = base
    while k:
        if k & 1:
            result = square if result is None else _mul(result, square)
        k >>= 1
        if k:
            square = _mul(square, square)
    return result


def _call(fn: str, a: _Dual, active) -> _Dual:
    x = a.val
    if fn == "sin":
        return _Dual(np.sin(x), _scale(a.der, np.cos(x)))
    if fn == "cos":
        return _Dual(np.cos(x), _scale(a.der, -np.sin(x)))
    if fn == "exp":
        v = np.exp(x)
        return _Dual(v, _scale(a.der, v))
    if fn == "ln":
        _check(active, x <= 0, "ln of a non-positive argument")
        return _Dual(np.log(x), _scale(a.der, 1.0 / x))
    if fn == "sqrt":
        _check(active, x < 0, "sqrt of a negative argument")
        v = np.sqrt(x)
        if a.der is not None:
            _check(active, x == 0, "sqrt is not differentiable at 0")
        return _Dual(v, _scale(a.der, 0.5 / v))
    if fn == "abs":
        # sign(0) := 0
        return _Dual(np.abs(x), _scale(a.der, np.sign(x)))
    raise ExpressionError(f"unknown function {fn!r}")


def _cond(node, X, active):
    if isinstance(node, Compare):
        a = _ev(node.left, X, None, active).val
        b = _ev(node.right, X, None, active).val
        return {
            "==": a == b,
            "<=": a <= b,
            "<": a < b,
            ">=": a >= b,
            ">": a > b,
        }[node.op]
    if isinstance(node, BoolOp):
        left = _cond(node.left, X, active)
        right = _cond(node.right, X, active)
        return (left & right) if node.op == "and" else (left | right)
    raise TypeError(f"not a condition node: {node!r}")


def _points(points, dim=None) -> np.ndarray:
    X = np.atleast_2d(np.asarray(points, dtype=float))
    if dim is not None and X.shape[1] != dim:
        raise ValueError(f"points must have {dim} coordinates, got {X.shape[1]}")
    return X


def _run(node, X, seeds):
    with np.errstate(all="ignore"):
        out = _ev(node, X, seeds, np.ones(X.shape[0], dtype=bool))
    return out


def eval_batch(e: Expression, points) -> np.ndarray:
    X = _points(points)
    return np.array(_run(e, X, None).val, dtype=float)


def grad_batch(e: Expression, points) -> np.ndarray:
    """Gradients at each row of ``points``; shape (N, n)."""
    X = _points(points)
    n = X.shape[1]
    out = _run(e, X, np.eye(n))
    if out.der is None:
        return np.zeros((X.shape[0], n))
    return np.array(out.der, dtype=float)


def value_and_dirderiv_batch(e: Expression, points, direction) -> tuple[np.ndarray, np.ndarray]:
    """Values and directional derivatives <grad e(x), d> at each row of ``points``."""
    X = _points(points)
    d = np.asarray(direction, dtype=float).reshape(-1, 1)
    out = _run(e, X, d)
    der = np.zeros(X.shape[0]) if out.der is None else np.array(out.der[:, 0], dtype=float)
    return np.array(out.val, dtype=float), der


def evaluate(e: Expression, point) -> float:
    return float(eval_batch(e, point)[0])


def grad(e: Expression, point) -> np.ndarray:
    return grad_batch(e, point)[0]


# ---------------------------------------------------------------------------
# Rounding-noise magnitude


def magnitude_batch(e: Expression, points) -> np.ndarray:
    """Sum of absolute values of the terms combined while evaluating ``e``.

    ``eps * magnitude`` bounds the floating-point error of ``evaluate`` up to
    a modest constant; the tangent tester uses it to tell a genuine violation
    from cancellation noise.
    """
    X = _points(points)
    with np.errstate(all="ignore"):
        val, mag = _mag(e, X, np.ones(X.shape[0], dtype=bool))
    return mag


def _mag(node, X, active):
    if isinstance(node, Const):
        v = np.full(X.shape[0], float(node.value))
        return v, np.abs(v)
    if isinstance(node, Var):
        v = X[:, node.index]
        return v, np.abs(v)
    if isinstance(node, Neg):
        v, m = _mag(node.arg, X, active)
        return -v, m
    if isinstance(node, BinOp):
        a, ma = _mag(node.left, X, active)
        b, mb = _mag(node.right, X, active)
        if node.op == "+":
            return a + b, ma + mb
        if node.op == "-":
            return a - b, ma + mb
        if node.op == "*":
            return a * b, ma * mb
        return a / b, ma / np.abs(b)
    if isinstance(node, Piecewise):
        mask = _cond(node.cond, X, active)
        t, mt = _mag(node.then, X, active & mask)
        o, mo = _mag(node.other, X, active & ~mask)
        return np.where(mask, t, o), np.where(mask, mt, mo)
    # transcendental and power nodes: treat the result as freshly rounded,
    # scaled by the argument noise through a unit-Lipschitz bound
    if isinstance(node, Pow):
        _, mb = _mag(node.base, X, active)
        v = _run(node, X, None).val
        k = _integer_exponent(node.exponent)
        if k is not None and k > 0:
            return v, mb ** k
        return v, np.abs(v) + mb
    if isinstance(node, Call):
        a, ma = _mag(node.arg, X, active)
        v = _call(node.fn, _Dual(a, None), np.zeros_like(active)).val
        return v, np.abs(v) + ma
    raise TypeError(f"not an expression node: {node!r}")


__all__ = [
    "Expression",
    "Const",
    "Var",
    "Neg",
    "BinOp",
    "Pow",
    "Call",
    "Piecewise",
    "Compare",
    "BoolOp",
    "parse",
    "to_text",
    "evaluate",
    "grad",
    "eval_batch",
    "grad_batch",
    "value_and_dirderiv_batch",
    "magnitude_batch",
    "is_affine",
    "variables_used",
    "ExpressionError",
    "ExpressionSyntaxError",
    "UnknownVariableError",
    "DomainError",
]
