"""Random polyhedra wrapped as problems, shared by the tangent tests."""

from fractions import Fraction

import numpy as np

from voptkkt.model import Problem, SetSpec
from voptkkt.polyhedra import Polyhedron, Row, tangent_cone_polyhedral


def linear_text(a, b, names):
    terms = " + ".join(f"({int(c)})*{x}" for c, x in zip(a, names))
    return f"{terms} - ({int(b)})"


def random_polyhedron_query(rng):
    """(Problem, SetSpec, Polyhedron, x0, u, v) with x0 in the polyhedron and small integer data."""
    d = int(rng.integers(2, 4))
    names = [f"x{i + 1}" for i in range(d)]
    x0 = rng.integers(-2, 3, size=d)
    rows, texts = [], []
    for k in range(int(rng.integers(2, 5))):
        a = rng.integers(-3, 4, size=d)
        if not a.any():
            a[0] = 1
        b = int(a @ x0) + (0 if k < 2 or rng.random() < 0.5 else int(rng.integers(1, 3)))
        rows.append(Row.make(tuple(int(c) for c in a), "LE", b))
        texts.append(linear_text(a, b, names))
    poly = Polyhedron(d, rows)
    P = Problem.from_dict({"name": "poly", "variables": names, "objectives": ["0"], "constraints": texts})
    T = tangent_cone_polyhedral(poly, tuple(Fraction(int(c)) for c in x0))
    u = rng.integers(-2, 3, size=d)
    if rng.random() < 0.7:
        # move u into the tangent cone most of the time so second-order sets are nonempty
        for _ in range(20):
            if T.contains(tuple(Fraction(int(c)) for c in u)):
                break
            u = rng.integers(-2, 3, size=d)
    if rng.random() < 0.2:
        u = np.zeros(d, dtype=int)
    v = rng.integers(-2, 3, size=d) * (0.5 if rng.random() < 0.5 else 1.0)
    s = SetSpec("Q0", tuple(float(c) for c in x0), (0.0,))
    return P, s, poly, x0.astype(float), u.astype(float), v
