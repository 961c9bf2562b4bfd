"""Exact twisted Courant algebroids as degree 2 symplectic Q-manifolds.

The phase space ``T*[2]T[1]R^n`` has coordinates ``x^i (0), th^i (1),
p_i (1), psi_i (2)`` and the canonical degree -2 Poisson bracket fixed by

    {psi_i, x^j} = delta_i^j,    {p_i, th^j} = delta_i^j.

``{f, .}`` is a graded derivation of degree ``|f| - 2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import tensors as T
from .graded import (Chart, Derivation, GradedCoordinate, Superfunction, degree_of,
                     derived_bracket, INHOMOGENEOUS, DegreeError, is_q_structure)
from .sampling import random_vector, rng
from .scalar import Scalar

__all__ = [
    "CourantPhase",
    "Section",
    "courant_chart",
    "canonical_poisson",
    "hamiltonian",
    "section_to_function",
    "function_to_section",
    "derivation_to_section",
    "dorfman_classical",
    "dorfman_via_derived",
    "pairing",
    "pairing_via_bracket",
    "PAIRING_NORMALIZATION",
    "AxiomReport",
    "axioms_check",
    "random_section",
    "courant_equivariant",
    "untwisted_dorfman",
]


def courant_chart(n: int) -> Chart:
    return Chart([GradedCoordinate(f"x{i}", 0) for i in range(1, n + 1)]
                 + [GradedCoordinate(f"th{i}", 1) for i in range(1, n + 1)]
                 + [GradedCoordinate(f"p{i}", 1) for i in range(1, n + 1)]
                 + [GradedCoordinate(f"psi{i}", 2) for i in range(1, n + 1)],
                 label=f"T*[2]T[1]R^{n}")


def _basic_fields(chart: Chart, n: int) -> dict[str, Derivation]:
    """``X_y = {y, .}`` for every coordinate ``y``."""
    out = {}
    for i in range(1, n + 1):
        out[f"x{i}"] = -Derivation.partial(chart, f"psi{i}")
        out[f"psi{i}"] = Derivation.partial(chart, f"x{i}")
        out[f"th{i}"] = Derivation.partial(chart, f"p{i}")
        out[f"p{i}"] = Derivation.partial(chart, f"th{i}")
    return out


_FIELDS: dict = {}


def _fields(chart: Chart) -> dict[str, Derivation]:
    hit = _FIELDS.get(chart)
    if hit is None:
        n = len(chart.base)
        if chart != courant_chart(n):
            raise ValueError(f"{chart!r} is not a Courant phase-space chart")
        hit = _FIELDS[chart] = _basic_fields(chart, n)
    return hit


def hamiltonian(f: Superfunction) -> Derivation:
    """The derivation ``{f, .}``."""
    chart = f.chart
    fields = _fields(chart)
    deg = degree_of(f)
    comps = {}
    for c in chart.coordinates:
        X = fields[c.name]
        val = X(f)
        # {f, y} = -(-1)^{|f||y|} {y, f}; parity of each term of f enters the sign
        if deg == INHOMOGENEOUS:
            out = chart.zero()
            for mono, s in val.terms.items():
                # X_y lowers degree by 2 - |y|, so |term of f| = |mono| + 2 - |y|
                fdeg = chart.mono_degree(mono) + 2 - c.degree
                sign = -1 if (fdeg * c.degree) % 2 == 0 else 1
                out = out + chart.monomial(mono).scale(s * sign)
            val = out
        else:
            val = -val if (deg * c.degree) % 2 == 0 else val
        if val.terms:
            comps[c.name] = val
    if deg == INHOMOGENEOUS:
        parities = {d % 2 for d in f.degrees()}
        if len(parities) != 1:
            raise DegreeError("hamiltonian of a function with mixed parity")
        return Derivation(chart, comps, None, parity=parities.pop(), check=False)
    return Derivation(chart, comps, deg - 2, check=False)


def canonical_poisson(f: Superfunction, g: Superfunction) -> Superfunction:
    """Canonical degree -2 bracket ``{f, g}``."""
    if f.chart != g.chart:
        raise ValueError("functions live on different charts")
    return hamiltonian(f)(g)


@dataclass
class CourantPhase:
    """Chart, generating function ``calQ`` and ``Q_CA = {calQ, .}`` for a 3-form ``H``."""

    n: int
    H: list
    chart: Chart = field(init=False)
    function: Superfunction = field(init=False)
    Q: Derivation = field(init=False)

    def __post_init__(self):
        self.H = T.scalarize(self.H)
        n = self.n
        ch = self.chart = courant_chart(n)
        calQ = ch.zero()
        for i in range(1, n + 1):
            calQ = calQ + ch[f"psi{i}"] * ch[f"th{i}"]
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    h = self.H[i][j][k]
                    if not h.is_zero():
                        calQ = calQ + (ch[f"th{i + 1}"] * ch[f"th{j + 1}"] * ch[f"th{k + 1}"]).scale(
                            h / 6)
        self.function = calQ
        self.Q = hamiltonian(calQ)

    def is_q(self):
        return is_q_structure(self.Q)


@dataclass
class Section:
    """``v (+) eta`` in ``TM (+) T*M`` with scalar components."""

    v: list
    eta: list

    def __post_init__(self):
        self.v = T.scalarize(self.v)
        self.eta = T.scalarize(self.eta)

    def __eq__(self, other):
        return (isinstance(other, Section) and T.is_zero_tensor(T.sub(self.v, other.v))
                and T.is_zero_tensor(T.sub(self.eta, other.eta)))

    def __add__(self, other):
        return Section(T.add(self.v, other.v), T.add(self.eta, other.eta))

    def scale(self, s):
        return Section(T.scale(self.v, s), T.scale(self.eta, s))

    def __str__(self):
        return f"v=[{', '.join(map(str, self.v))}] eta=[{', '.join(map(str, self.eta))}]"


def section_to_function(chart: Chart, s: Section) -> Superfunction:
    """``v (+) eta  ->  eta_i th^i + v^i p_i``."""
    out = chart.zero()
    for i, (a, b) in enumerate(zip(s.eta, s.v), start=1):
        out = out + chart[f"th{i}"].scale(a) + chart[f"p{i}"].scale(b)
    return out


def function_to_section(f: Superfunction) -> Section:
    chart = f.chart
    n = len(chart.base)
    if degree_of(f) not in (1, 0) or (f.terms and degree_of(f) != 1):
        raise DegreeError("expected a degree 1 function")
    v, eta = [], []
    for i in range(1, n + 1):
        eta.append(f.coefficient(chart["th" + str(i)].terms and next(iter(chart[f"th{i}"].terms))))
        v.append(f.coefficient(next(iter(chart[f"p{i}"].terms))))
    rest = f - section_to_function(chart, Section(v, eta))
    if rest.terms:
        raise DegreeError("degree 1 function has components outside th, p")
    return Section(v, eta)


def derivation_to_section(D: Derivation) -> Section:
    """Read a section off the hamiltonian field ``{eps, .}``: ``th^i -> v^i``, ``p_i -> eta_i``."""
    chart = D.chart
    n = len(chart.base)
    v = [D.component(f"th{i}").scalar_part() for i in range(1, n + 1)]
    eta = [D.component(f"p{i}").scalar_part() for i in range(1, n + 1)]
    return Section(v, eta)


# -- classical side ------------------------------------------------------

def pairing(s1: Section, s2: Section) -> Scalar:
    n = len(s1.v)
    return sum((s1.eta[i] * s2.v[i] + s2.eta[i] * s1.v[i] for i in range(n)), Scalar())


def dorfman_classical(s1: Section, s2: Section, H, twist: bool = True) -> Section:
    """``[v,v']_Lie (+) (L_v eta' - i_v' d eta + i_v i_v' H)``."""
    n = len(s1.v)
    names = T.coords(n)
    v = T.lie_bracket(s1.v, s2.v, names)
    eta = T.sub(T.lie_one_form(s1.v, s2.eta, names),
                T.contract(s2.v, T.d_one_form(s1.eta, names)))
    if twist:
        H = T.scalarize(H)
        eta = T.add(eta, T.contract(s1.v, T.contract(s2.v, H)))
    return Section(v, eta)


def dorfman_via_derived(phase: CourantPhase, s1: Section, s2: Section) -> Section:
    """Q_CA-derived bracket of the hamiltonian fields of ``s1, s2``, read back as a section.

    The ordering ``[[e1, Q], e2]`` reproduces the Dorfman bracket on the nose;
    ``[e1, [Q, e2]]`` gives ``-[s2, s1]``, which differs by ``d<s1, s2>``.
    """
    ch = phase.chart
    e1 = hamiltonian(section_to_function(ch, s1))
    e2 = hamiltonian(section_to_function(ch, s2))
    br = derived_bracket(phase.Q, e1, e2)
    return derivation_to_section(br)


# Measured once on (d/dx1 (+) 0, 0 (+) dx1): {p1, th1} = 1 = <d1, dx1>.
PAIRING_NORMALIZATION = 1


def pairing_via_bracket(chart: Chart, s1: Section, s2: Section) -> Scalar:
    f = canonical_poisson(section_to_function(chart, s1), section_to_function(chart, s2))
    return f.scalar_part() / PAIRING_NORMALIZATION


def untwisted_dorfman(s1: Section, s2: Section, H=None) -> Section:
    """The Dorfman bracket with the ``H`` term dropped (a mutation for tests)."""
    return dorfman_classical(s1, s2, None, twist=False)


def random_section(r, n: int, degree: int = 2, terms: int = 3) -> Section:
    names = T.coords(n)
    return Section(random_vector(r, names, n, degree=degree, terms=terms),
                   random_vector(r, names, n, degree=degree, terms=terms))


@dataclass
class AxiomReport:
    ok: bool
    results: dict
    counterexample: dict | None = None
    samples: int = 0


def _anchor_apply(s: Section, f: Scalar) -> Scalar:
    return T.apply_vf(s.v, f, T.coords(len(s.v)))


def axioms_check(H, n: int = 3, seed: int = 0, samples: int = 10, degree: int = 1,
                 bracket=None) -> AxiomReport:
    """The three Courant axioms on seeded random polynomial sections.

    ``bracket(s1, s2)`` defaults to the derived bracket of ``Q_CA(H)``; passing
    another callable tests a candidate bracket against the same axioms.

    1. ``rho(a) <b, c> = <[a, b], c> + <b, [a, c]>`` (polarized form)
    2. ``[a, [b, c]] = [[a, b], c] + [b, [a, c]]``
    3. ``2 [a, a] = rho*(d <a, a>)``
    """
    H = T.scalarize(H)
    if bracket is None:
        phase = CourantPhase(n, H)

        def bracket(s1, s2):
            return dorfman_via_derived(phase, s1, s2)

    r = rng(seed)
    names = T.coords(n)
    results = {"pairing": True, "leibniz": True, "anchor": True}
    counter = None
    for k in range(samples):
        a, b, c = (random_section(r, n, degree) for _ in range(3))
        ab, ac = bracket(a, b), bracket(a, c)
        lhs1 = _anchor_apply(a, pairing(b, c))
        rhs1 = pairing(ab, c) + pairing(b, ac)
        bc = bracket(b, c)
        lhs2 = bracket(a, bc)
        rhs2 = bracket(ab, c) + bracket(b, ac)
        aa = bracket(a, a)
        lhs3 = aa.scale(2)
        rhs3 = Section(T.zeros(n), T.d_function(pairing(a, a), names))
        checks = {"pairing": lhs1 == rhs1, "leibniz": lhs2 == rhs2, "anchor": lhs3 == rhs3}
        for name, good in checks.items():
            if not good and results[name]:
                results[name] = False
                if counter is None:
                    counter = {"axiom": name, "sample": k, "a": str(a), "b": str(b), "c": str(c)}
    return AxiomReport(all(results.values()), results, counter, samples)


def courant_equivariant(phase: CourantPhase, omega: Superfunction, gens) -> dict:
    """Horizontal, equivariant and basic predicates with ``Q = Q_CA``.

    ``gens`` may mix degree 1 functions (replaced by their hamiltonian
    fields) and degree -1 derivations.
    """
    from .equivariance import is_basic, is_equivariant, is_horizontal

    fields = []
    for g in gens:
        if isinstance(g, Section):
            g = section_to_function(phase.chart, g)
        if isinstance(g, Superfunction):
            if g.terms and degree_of(g) != 1:
                raise DegreeError("generating functions must have degree 1")
            g = hamiltonian(g) if g.terms else Derivation.zero(phase.chart, -1)
        if g.degree != -1:
            raise DegreeError(f"generator has degree {g.degree}, expected -1")
        fields.append(g)
    return {
        "horizontal": is_horizontal(omega, fields),
        "equivariant": is_equivariant(omega, phase.Q, fields),
        "basic": is_basic(omega, phase.Q, fields),
    }
