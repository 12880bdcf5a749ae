"""Seeded random expression corpora shared by the test modules."""

import random
from fractions import Fraction

from cartanforge import expr as ex


def rng(seed):
    return random.Random(seed)


def rational(r, lo=-3, hi=3, dens=(1, 2, 3, 4)):
    num = r.randint(lo, hi)
    den = r.choice(dens)
    return Fraction(num, den)


def monomial(r, names, max_degree):
    total = r.randint(0, max_degree)
    f = ex.Rat(rational(r))
    for _ in range(total):
        f = ex.mul(f, ex.var(r.choice(names)))
    return f


def poly(r, names, max_degree=3, terms=4):
    """Random polynomial with rational coefficients; may be zero."""
    return ex.add(*(monomial(r, names, max_degree) for _ in range(r.randint(1, terms))))


def nonzero_poly(r, names, max_degree=3, terms=4):
    while True:
        p = poly(r, names, max_degree, terms)
        if not p.is_zero():
            return p


def smooth_expr(r, names, depth=2):
    """Random expression built from pieces that stay finite on [-1, 1]^n.

    sqrt/log arguments are shifted to stay positive on the sample box.
    """
    if depth == 0 or r.random() < 0.35:
        return poly(r, names, max_degree=2, terms=3)
    kind = r.choice(["add", "mul", "sin", "cos", "exp", "sqrt", "log", "pow"])
    a = smooth_expr(r, names, depth - 1)
    if kind == "add":
        return ex.add(a, smooth_expr(r, names, depth - 1))
    if kind == "mul":
        return ex.mul(a, smooth_expr(r, names, depth - 1))
    if kind in ("sin", "cos"):
        return ex.func(kind, a)
    if kind == "exp":
        return ex.func("exp", ex.mul(ex.rat(1, 4), a))
    bounded = ex.add(ex.mul(ex.rat(1, 8), a), ex.rat(0))
    shifted = ex.add(ex.func("cos", bounded), ex.rat(3))  # in [2, 4]
    if kind == "sqrt":
        return ex.func("sqrt", shifted)
    if kind == "log":
        return ex.func("log", shifted)
    return ex.pow_(shifted, r.choice([-2, -1, 2, 3]))


def sample_point(r, names, lo=-1.0, hi=1.0):
    return {n: r.uniform(lo, hi) for n in sorted(names)}
