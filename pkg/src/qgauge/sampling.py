"""Seeded random polynomial data for property suites and solvers."""

from __future__ import annotations

import random
from itertools import combinations_with_replacement

from gmpy2 import mpq

from .scalar import Scalar

__all__ = ["rng", "random_poly", "random_vector", "random_matrix", "monomials_upto",
           "random_point"]


def rng(seed) -> random.Random:
    return random.Random(seed)


def monomials_upto(names, degree: int) -> list[Scalar]:
    """All monomials of total degree <= ``degree``, lowest degree first."""
    out = []
    for d in range(degree + 1):
        for combo in combinations_with_replacement(names, d):
            m = Scalar(1)
            for v in combo:
                m = m * Scalar.var(v)
            out.append(m)
    return out


def random_poly(r: random.Random, names, degree: int = 2, terms: int = 3, span: int = 3) -> Scalar:
    monos = monomials_upto(names, degree)
    out = Scalar()
    for _ in range(terms):
        c = r.randint(-span, span)
        if c:
            out = out + monos[r.randrange(len(monos))] * c
    return out


def random_vector(r, names, n=None, **kw) -> list[Scalar]:
    return [random_poly(r, names, **kw) for _ in range(n or len(names))]


def random_matrix(r, names, n=None, **kw) -> list[list[Scalar]]:
    n = n or len(names)
    return [[random_poly(r, names, **kw) for _ in range(n)] for _ in range(n)]


def random_point(r: random.Random, names, span: int = 7) -> dict:
    """Random rational point with small numerators and denominators."""
    return {v: mpq(r.randint(-span * 4, span * 4), r.randint(1, span)) for v in names}
