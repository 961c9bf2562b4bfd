"""Seeded random graded objects for the property suites."""

from __future__ import annotations

import itertools

from qgauge.graded import Chart, Derivation, GradedCoordinate, Superfunction
from qgauge.sampling import random_poly
from qgauge.scalar import Scalar


def chart(coords, label="test") -> Chart:
    return Chart([GradedCoordinate(n, d) for n, d in coords], label)


# a small chart with base variables and coordinates of degrees 1, 1, 2, -
MIXED = chart([("x1", 0), ("x2", 0), ("th1", 1), ("th2", 1), ("p1", 1), ("u", 2)])


def random_scalar(r, names, rational=False) -> Scalar:
    s = random_poly(r, names, degree=2, terms=3)
    if rational and r.random() < 0.5:
        den = random_poly(r, names, degree=1, terms=2)
        if not den.is_zero():
            s = s / den
    return s


def _monomials_of_degree(ch: Chart, degree: int, max_len: int = 3):
    out = []
    gens = [c.name for c in ch.graded]
    for k in range(max_len + 1):
        for combo in itertools.combinations_with_replacement(gens, k):
            odd = [g for g in combo if ch.degree(g) % 2]
            if sum(ch.degree(g) for g in combo) == degree and len(set(odd)) == len(odd):
                out.append(combo)
    return out


def monomial(ch: Chart, combo) -> Superfunction:
    f = ch.one()
    for g in combo:
        f = f * ch[g]
    return f


def random_superfunction(r, ch: Chart, degree: int, terms: int = 3, rational=False) -> Superfunction:
    combos = _monomials_of_degree(ch, degree)
    f = ch.zero()
    if not combos:
        return f
    for _ in range(terms):
        m = monomial(ch, combos[r.randrange(len(combos))])
        f = f + m.scale(random_scalar(r, ch.base, rational))
    return f


def random_derivation(r, ch: Chart, degree: int, density: float = 0.6) -> Derivation:
    comps = {}
    for c in ch.coordinates:
        if r.random() < density:
            f = random_superfunction(r, ch, c.degree + degree, terms=2)
            if f.terms:
                comps[c.name] = f
    return Derivation(ch, comps, degree)


def random_homogeneous(r, ch: Chart, degrees=(0, 1, 2, 3)):
    d = r.choice(degrees)
    return d, random_superfunction(r, ch, d)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE: list[str] = []
