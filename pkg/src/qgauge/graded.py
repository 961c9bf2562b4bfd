"""Superalgebra engine: graded charts, superfunctions and graded derivations.

Sign conventions
----------------
All signs are governed by the single total degree of each element (the
double grading that appears after prolongation is collapsed).  Moving a
homogeneous element of degree ``a`` past one of degree ``b`` costs
``(-1)**(a*b)``.  A derivation ``D`` of degree ``k`` obeys

    D(f g) = D(f) g + (-1)**(k*|f|) f D(g)

and the graded commutator is ``[D1, D2] = D1 D2 - (-1)**(k1*k2) D2 D1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .scalar import Scalar, as_scalar, natural_key

__all__ = [
    "GradedCoordinate",
    "Chart",
    "Superfunction",
    "Derivation",
    "QCheck",
    "ChartMismatch",
    "DegreeError",
    "INHOMOGENEOUS",
    "mul",
    "apply",
    "commutator",
    "derived_bracket",
    "degree_of",
    "is_q_structure",
]

INHOMOGENEOUS = "inhomogeneous"


class ChartMismatch(ValueError):
    pass


class DegreeError(ValueError):
    pass


@dataclass(frozen=True)
class GradedCoordinate:
    name: str
    degree: int
    bidegree: tuple[int, int] | None = None  # inert metadata, never used for signs

    @property
    def parity(self) -> int:
        return self.degree % 2


class Chart:
    """An ordered graded coordinate system.

    Degree-0 coordinates are the variables of the scalar ring; every other
    coordinate is a polynomial generator.  The declaration order fixes the
    canonical monomial order.
    """

    def __init__(self, coordinates: Iterable[GradedCoordinate], label: str = ""):
        coords = tuple(coordinates)
        names = [c.name for c in coords]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate coordinate names in chart: {names}")
        for c in coords:
            if c.degree < 0:
                raise ValueError(f"coordinate {c.name} has negative degree")
        self.label = label
        self.coordinates = coords
        self.base = tuple(c.name for c in coords if c.degree == 0)
        self.graded = tuple(c for c in coords if c.degree != 0)
        self.position = {c.name: i for i, c in enumerate(self.graded)}
        self.by_name = {c.name: c for c in coords}
        self.degrees = tuple(c.degree for c in self.graded)
        self.odd = tuple(i for i, c in enumerate(self.graded) if c.degree % 2)
        self._key = tuple((c.name, c.degree) for c in coords)
        self._mulcache: dict = {}
        self._unit = (0,) * len(self.graded)

    def __eq__(self, other):
        return isinstance(other, Chart) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        body = ", ".join(f"{c.name}({c.degree})" for c in self.coordinates)
        return f"Chart[{body}]"

    def degree(self, name: str) -> int:
        c = self.by_name.get(name)
        return 0 if c is None else c.degree

    # -- constructors -----------------------------------------------------
    def zero(self) -> "Superfunction":
        return Superfunction(self, {})

    def one(self) -> "Superfunction":
        return Superfunction(self, {self._unit: Scalar(1)})

    def scalar(self, s) -> "Superfunction":
        s = as_scalar(s)
        return Superfunction(self, {self._unit: s} if s else {})

    def coord(self, name: str) -> "Superfunction":
        if name in self.position:
            mono = list(self._unit)
            mono[self.position[name]] = 1
            return Superfunction(self, {tuple(mono): Scalar(1)})
        if name in self.by_name:
            return self.scalar(Scalar.var(name))
        raise KeyError(f"{name} is not a coordinate of {self!r}")

    def __getitem__(self, name: str) -> "Superfunction":
        return self.coord(name)

    def monomial(self, mono: tuple) -> "Superfunction":
        return Superfunction(self, {mono: Scalar(1)})

    # -- monomial algebra ---------------------------------------------------
    def mono_degree(self, mono: tuple) -> int:
        return sum(e * d for e, d in zip(mono, self.degrees))

    def mono_parity(self, mono: tuple) -> int:
        return sum(mono[i] for i in self.odd) & 1

    def mono_mul(self, a: tuple, b: tuple):
        """Return ``(sign, a*b)`` in canonical order, or None if it vanishes."""
        key = (a, b)
        hit = self._mulcache.get(key)
        if hit is not None or key in self._mulcache:
            return hit
        sign = 1
        result = None
        clash = False
        for i in self.odd:
            if a[i]:
                if b[i]:
                    clash = True
                    break
                for j in self.odd:
                    if j >= i:
                        break
                    if b[j]:
                        sign = -sign
        if not clash:
            result = (sign, tuple(x + y for x, y in zip(a, b)))
        self._mulcache[key] = result
        return result

    def check(self, *objs):
        for o in objs:
            if o.chart != self:
                raise ChartMismatch(f"chart mismatch: {o.chart!r} vs {self!r}")


class Superfunction:
    """Koszul-normalized polynomial in the graded coordinates of a chart."""

    __slots__ = ("chart", "terms")

    def __init__(self, chart: Chart, terms: dict):
        self.chart = chart
        self.terms: dict[tuple, Scalar] = terms

    # -- inspection -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def coefficient(self, mono: tuple) -> Scalar:
        return self.terms.get(mono, Scalar())

    def scalar_part(self) -> Scalar:
        return self.coefficient(self.chart._unit)

    def degrees(self) -> set[int]:
        return {self.chart.mono_degree(m) for m in self.terms}

    def __eq__(self, other):
        if isinstance(other, Superfunction):
            if other.chart != self.chart:
                return False
            return (self - other).is_zero()
        try:
            return (self - self.chart.scalar(as_scalar(other))).is_zero()
        except TypeError:
            return NotImplemented

    __hash__ = None

    # -- arithmetic -------------------------------------------------------
    def _lift(self, other) -> "Superfunction":
        if isinstance(other, Superfunction):
            if other.chart != self.chart:
                raise ChartMismatch(f"chart mismatch: {other.chart!r} vs {self.chart!r}")
            return other
        return self.chart.scalar(as_scalar(other))

    def __add__(self, other) -> "Superfunction":
        other = self._lift(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m)
            if v is None:
                out[m] = c
            else:
                v = v + c
                if v.is_zero():
                    del out[m]
                else:
                    out[m] = v
        return Superfunction(self.chart, out)

    __radd__ = __add__

    def __neg__(self) -> "Superfunction":
        return Superfunction(self.chart, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Superfunction":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "Superfunction":
        return self._lift(other) - self

    def scale(self, s) -> "Superfunction":
        s = as_scalar(s)
        if s.is_zero():
            return self.chart.zero()
        out = {}
        for m, c in self.terms.items():
            v = c * s
            if not v.is_zero():
                out[m] = v
        return Superfunction(self.chart, out)

    def __mul__(self, other) -> "Superfunction":
        if isinstance(other, Superfunction):
            return mul(self, other)
        if isinstance(other, Derivation):
            return NotImplemented
        return self.scale(other)

    def __rmul__(self, other) -> "Superfunction":
        return self.scale(other)

    def __truediv__(self, other) -> "Superfunction":
        return self.scale(1 / as_scalar(other))

    def __pow__(self, e: int) -> "Superfunction":
        if e < 0:
            if any(m != self.chart._unit for m in self.terms):
                raise ValueError("negative power of a non-scalar superfunction")
            return self.chart.scalar(self.scalar_part() ** e)
        out = self.chart.one()
        for _ in range(e):
            out = out * self
        return out

    def map_coefficients(self, fn) -> "Superfunction":
        out = {}
        for m, c in self.terms.items():
            v = fn(c)
            if not v.is_zero():
                out[m] = v
        return Superfunction(self.chart, out)

    def evaluate_coefficients(self, point) -> dict:
        return {m: c.evaluate(point) for m, c in self.terms.items()}

    def to_chart(self, chart: Chart) -> "Superfunction":
        """Re-express on a chart containing all graded coordinates used here."""
        if chart == self.chart:
            return self
        src = self.chart.graded
        idx = []
        for c in src:
            if c.name not in chart.position or chart.by_name[c.name].degree != c.degree:
                raise ChartMismatch(f"{c.name} is not a coordinate of {chart!r}")
            idx.append(chart.position[c.name])
        # the target order may differ, so rebuild each monomial by multiplication
        out = chart.zero()
        for m, coeff in self.terms.items():
            term = chart.scalar(coeff)
            for i, e in enumerate(m):
                if e:
                    mono = list(chart._unit)
                    mono[idx[i]] = e
                    term = term * chart.monomial(tuple(mono))
            out = out + term
        return out

    def __str__(self):
        from .textio import format_superfunction

        return format_superfunction(self)

    def __repr__(self):
        return f"Superfunction({self})"


def mul(f: Superfunction, g: Superfunction) -> Superfunction:
    """Koszul-signed product of two superfunctions on the same chart."""
    chart = f.chart
    if g.chart != chart:
        raise ChartMismatch(f"chart mismatch: {g.chart!r} vs {chart!r}")
    out: dict[tuple, Scalar] = {}
    mm = chart.mono_mul
    for ma, ca in f.terms.items():
        for mb, cb in g.terms.items():
            r = mm(ma, mb)
            if r is None:
                continue
            sign, m = r
            c = ca * cb
            if sign < 0:
                c = -c
            v = out.get(m)
            out[m] = c if v is None else v + c
    return Superfunction(chart, {m: c for m, c in out.items() if not c.is_zero()})


class Derivation:
    """Graded vector field ``sum_a f_a d/dq^a``.

    ``components`` maps a coordinate name to the superfunction ``D(q^a)``.
    Names that are not chart coordinates are allowed: they denote extra
    scalar variables (for instance jet symbols of worldsheet fields) on which
    the derivation acts through the chain rule.  ``degree`` is None for an
    inhomogeneous field, in which case ``parity`` must be given.
    """

    __slots__ = ("chart", "components", "degree", "parity", "_cache")

    def __init__(self, chart: Chart, components: Mapping[str, Superfunction],
                 degree: int | None, parity: int | None = None, check: bool = True):
        self.chart = chart
        comps = {}
        for name, f in components.items():
            if not isinstance(f, Superfunction):
                f = chart.scalar(as_scalar(f))
            if f.chart != chart:
                raise ChartMismatch(f"component {name} lives on {f.chart!r}")
            if f.terms:
                comps[name] = f
        self.components: dict[str, Superfunction] = comps
        self.degree = degree
        if degree is None and parity is None:
            raise DegreeError("an inhomogeneous derivation needs an explicit parity")
        self.parity = (degree % 2) if degree is not None else parity % 2
        self._cache: dict = {}
        if check and degree is not None:
            for name, f in comps.items():
                want = degree + chart.degree(name)
                got = f.degrees()
                if got != {want}:
                    raise DegreeError(
                        f"component {name} has degrees {sorted(got)}, expected {want}")

    @classmethod
    def zero(cls, chart: Chart, degree: int) -> "Derivation":
        return cls(chart, {}, degree)

    @classmethod
    def partial(cls, chart: Chart, name: str) -> "Derivation":
        return cls(chart, {name: chart.one()}, -chart.degree(name))

    def component(self, name: str) -> Superfunction:
        return self.components.get(name, self.chart.zero())

    def is_zero(self) -> bool:
        return not self.components

    def __eq__(self, other):
        if not isinstance(other, Derivation):
            return NotImplemented
        if other.chart != self.chart:
            return False
        return (self - other).is_zero()

    __hash__ = None

    def _combine(self, other: "Derivation", sign: int) -> "Derivation":
        if other.chart != self.chart:
            raise ChartMismatch("derivations on different charts")
        if self.parity != other.parity and not (self.is_zero() or other.is_zero()):
            raise DegreeError("cannot add derivations of different parity")
        comps = dict(self.components)
        for name, f in other.components.items():
            comps[name] = comps[name] + (f if sign > 0 else -f) if name in comps else (
                f if sign > 0 else -f)
        degree = self.degree if self.degree == other.degree else None
        parity = self.parity if not self.is_zero() else other.parity
        if self.is_zero():
            degree = other.degree
        elif other.is_zero():
            degree = self.degree
        return Derivation(self.chart, comps, degree, parity, check=False)

    def __add__(self, other: "Derivation") -> "Derivation":
        return self._combine(other, 1)

    def __sub__(self, other: "Derivation") -> "Derivation":
        return self._combine(other, -1)

    def __neg__(self) -> "Derivation":
        return Derivation(self.chart, {n: -f for n, f in self.components.items()},
                          self.degree, self.parity, check=False)

    def __rmul__(self, f) -> "Derivation":
        """Left multiplication ``f * D`` by a scalar or a homogeneous superfunction."""
        if not isinstance(f, Superfunction):
            s = as_scalar(f)
            return Derivation(self.chart, {n: g.scale(s) for n, g in self.components.items()},
                              self.degree, self.parity, check=False)
        deg = degree_of(f)
        if deg == INHOMOGENEOUS:
            raise DegreeError("left factor must be homogeneous")
        return Derivation(self.chart, {n: f * g for n, g in self.components.items()},
                          None if self.degree is None else self.degree + deg,
                          (self.parity + deg) % 2, check=False)

    def __call__(self, f: Superfunction) -> Superfunction:
        return apply(self, f)

    def __str__(self):
        from .textio import format_derivation

        return format_derivation(self)

    def __repr__(self):
        return f"Derivation({self})"

    # -- action -----------------------------------------------------------
    def _on_monomial(self, mono: tuple) -> Superfunction:
        hit = self._cache.get(mono)
        if hit is not None:
            return hit
        chart = self.chart
        graded = chart.graded
        out = chart.zero()
        left_parity = 0
        for k, e in enumerate(mono):
            if not e:
                continue
            comp = self.components.get(graded[k].name)
            if comp is not None:
                left = tuple(mono[:k]) + (0,) * (len(mono) - k)
                right = list(mono)
                for j in range(k):
                    right[j] = 0
                right[k] = e - 1
                term = chart.monomial(left) * comp * chart.monomial(tuple(right))
                factor = e * (-1 if (self.parity and left_parity) else 1)
                out = out + term.scale(factor)
            if graded[k].degree % 2:
                left_parity ^= e & 1
        self._cache[mono] = out
        return out

    def on_scalar(self, s: Scalar) -> Superfunction:
        out = self.chart.zero()
        for v in s.variables():
            comp = self.components.get(v)
            if comp is not None:
                ds = s.diff(v)
                if not ds.is_zero():
                    out = out + comp.scale(ds)
        return out


def apply(D: Derivation, f: Superfunction) -> Superfunction:
    """Action of a graded derivation on a superfunction (graded Leibniz rule)."""
    chart = D.chart
    if f.chart != chart:
        raise ChartMismatch(f"chart mismatch: {f.chart!r} vs {chart!r}")
    acc: dict[tuple, Scalar] = {}

    def accumulate(g: Superfunction):
        for m, c in g.terms.items():
            v = acc.get(m)
            acc[m] = c if v is None else v + c

    for mono, s in f.terms.items():
        ds = D.on_scalar(s)
        if ds.terms:
            accumulate(ds * chart.monomial(mono))
        dm = D._on_monomial(mono)
        if dm.terms:
            accumulate(dm.scale(s))
    return Superfunction(chart, {m: c for m, c in acc.items() if not c.is_zero()})


def _generator(chart: Chart, name: str) -> Superfunction:
    if name in chart.position:
        return chart.coord(name)
    return chart.scalar(Scalar.var(name))


def commutator(D1: Derivation, D2: Derivation) -> Derivation:
    """Graded commutator, computed on coordinate generators."""
    chart = D1.chart
    if D2.chart != chart:
        raise ChartMismatch("derivations on different charts")
    sign = -1 if (D1.parity and D2.parity) else 1
    names = list(D1.components) + [n for n in D2.components if n not in D1.components]
    comps = {}
    for name in names:
        q = _generator(chart, name)
        a = apply(D1, apply(D2, q))
        b = apply(D2, apply(D1, q))
        val = a - b if sign > 0 else a + b
        if val.terms:
            comps[name] = val
    degree = None if (D1.degree is None or D2.degree is None) else D1.degree + D2.degree
    return Derivation(chart, comps, degree, D1.parity + D2.parity, check=False)


def derived_bracket(Q: Derivation, E1: Derivation, E2: Derivation) -> Derivation:
    """``[E1, E2]_Q = [[E1, Q], E2]`` for degree -1 fields and a degree 1 ``Q``.

    Equals ``[E1, [Q, E2]]`` whenever ``[E1, E2] = 0`` (the two differ by
    ``Q [E1, E2]``); this ordering satisfies the Loday identity for every
    triple once ``[Q, Q] = 0``.
    """
    if Q.degree != 1:
        raise DegreeError(f"derived bracket needs deg Q = 1, got {Q.degree}")
    for E in (E1, E2):
        if E.degree != -1:
            raise DegreeError(f"derived bracket needs degree -1 fields, got {E.degree}")
    return commutator(commutator(E1, Q), E2)


def degree_of(f: Superfunction):
    """Total degree of a homogeneous superfunction, else ``INHOMOGENEOUS``."""
    degs = f.degrees()
    if not degs:
        return 0
    if len(degs) == 1:
        return degs.pop()
    return INHOMOGENEOUS


@dataclass
class QCheck:
    ok: bool
    certificate: tuple[str, Superfunction] | None = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def is_q_structure(D: Derivation) -> QCheck:
    """Degree 1 and ``[D, D] = 0``; on failure the certificate is a nonzero component."""
    if D.degree != 1:
        return QCheck(False, None, f"degree is {D.degree}, not 1")
    sq = commutator(D, D)
    if sq.is_zero():
        return QCheck(True)
    order = {c.name: i for i, c in enumerate(D.chart.coordinates)}
    name = min(sq.components, key=lambda n: (order.get(n, len(order)), natural_key(n)))
    return QCheck(False, (name, sq.components[name]), f"[Q,Q]({name}) != 0")
