"""Tangent prolongation ``T[1]M`` of a graded chart and the maps built on it.

The prolonged chart carries a second copy ``dq`` of every coordinate ``q``
with degree shifted by one.  ``d`` sends ``q -> dq``; contraction and Lie
derivative lifts follow the Cartan calculus

    i_E(dq^a) = E^a,          L_E = [i_E, d],

so that ``L_E`` restricts to ``E`` on the base coordinates.  With this choice
``Q~ = d + L_Q`` acts as ``Q~ q = dq + Q^a`` and ``Q~ dq = -d(Q^a)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .graded import (Chart, ChartMismatch, DegreeError, Derivation, GradedCoordinate,
                     Superfunction, apply, commutator, is_q_structure)
from .scalar import Scalar

__all__ = [
    "ProlongedChart",
    "AlgebraMap",
    "PullbackMap",
    "prolong",
    "contraction",
    "lie_lift",
    "lift_pullback",
    "gauge_variation",
    "to_q_basis",
    "from_q_basis",
    "extend_derivation",
    "transport_derivation",
    "dname",
    "qname",
    "product_chart",
]


def dname(name: str) -> str:
    return "d" + name


def qname(name: str) -> str:
    return "Q" + name


class AlgebraMap:
    """Degree-preserving algebra morphism given by images of the generators.

    ``images`` maps coordinate names of ``domain`` to superfunctions on
    ``codomain``.  Degree 0 coordinates map to degree 0 superfunctions,
    i.e. scalars; unlisted degree 0 names are left untouched, which also
    covers extra scalar symbols shared by both sides.
    """

    def __init__(self, domain: Chart, codomain: Chart, images: dict):
        self.domain = domain
        self.codomain = codomain
        self.images: dict[str, Superfunction] = {}
        for name, img in images.items():
            if not isinstance(img, Superfunction):
                img = codomain.scalar(img)
            if img.chart != codomain:
                raise ChartMismatch(f"image of {name} lives on {img.chart!r}")
            self.images[name] = img
        for c in domain.graded:
            if c.name not in self.images:
                if c.name in codomain.position and codomain.by_name[c.name].degree == c.degree:
                    self.images[c.name] = codomain.coord(c.name)
                else:
                    raise ValueError(f"no image given for {c.name}")
            img = self.images[c.name]
            if img.terms and img.degrees() != {c.degree}:
                raise DegreeError(f"image of {c.name} is not of degree {c.degree}")
        self.scalar_map: dict[str, Scalar] = {}
        for name in domain.base:
            if name in self.images:
                img = self.images[name]
                if any(m != codomain._unit for m in img.terms):
                    raise DegreeError(f"image of {name} must have degree 0")
                self.scalar_map[name] = img.scalar_part()
        self._cache: dict = {}

    def _mono(self, mono: tuple) -> Superfunction:
        hit = self._cache.get(mono)
        if hit is None:
            hit = self.codomain.one()
            for c, e in zip(self.domain.graded, mono):
                for _ in range(e):
                    hit = hit * self.images[c.name]
            self._cache[mono] = hit
        return hit

    def scalar(self, s: Scalar) -> Scalar:
        return s.subs(self.scalar_map)

    def __call__(self, f: Superfunction) -> Superfunction:
        if f.chart != self.domain:
            raise ChartMismatch(f"{f.chart!r} is not the domain {self.domain!r}")
        out = self.codomain.zero()
        for mono, s in f.terms.items():
            s2 = self.scalar(s)
            if not s2.is_zero():
                out = out + self._mono(mono).scale(s2)
        return out

    def compose(self, inner: "AlgebraMap") -> "AlgebraMap":
        """``self o inner``: first ``inner``, then ``self``."""
        if inner.codomain != self.domain:
            raise ChartMismatch("maps do not compose")
        imgs = {name: self(inner.images[name]) for name in inner.images}
        return AlgebraMap(inner.domain, self.codomain, imgs)


def extend_derivation(D: Derivation, chart: Chart) -> Derivation:
    """The same derivation on a chart that contains ``D.chart``'s coordinates."""
    comps = {n: f.to_chart(chart) for n, f in D.components.items()}
    return Derivation(chart, comps, D.degree, D.parity, check=False)


def transport_derivation(D: Derivation, phi: AlgebraMap, psi: AlgebraMap) -> Derivation:
    """``D' = phi o D o psi`` for mutually inverse ``phi: A -> B``, ``psi: B -> A``."""
    target = phi.codomain
    comps = {}
    for c in target.coordinates:
        val = phi(apply(D, psi(target.coord(c.name))))
        if val.terms:
            comps[c.name] = val
    return Derivation(target, comps, D.degree, D.parity, check=False)


@dataclass
class ProlongedChart:
    base: Chart
    Q: Derivation | None = None
    chart: Chart = field(init=False)
    d: Derivation = field(init=False)
    LQ: Derivation = field(init=False)
    Qt: Derivation = field(init=False)

    def __post_init__(self):
        base = self.base
        coords = list(base.coordinates) + [GradedCoordinate(dname(c.name), c.degree + 1)
                                           for c in base.coordinates]
        ch = self.chart = Chart(coords, label=f"T[1]({base.label})")
        self.d = Derivation(ch, {c.name: ch.coord(dname(c.name)) for c in base.coordinates}, 1)
        if self.Q is None:
            self.Q = Derivation.zero(base, 1)
        self.LQ = lie_lift(self, self.Q)
        self.Qt = self.d + self.LQ if self.LQ.components else self.d
        self._qbasis = None

    def embed(self, f: Superfunction) -> Superfunction:
        return f.to_chart(self.chart)

    @property
    def qbasis_chart(self) -> Chart:
        """Coordinates ``q^a`` and ``Qq^a = Q~ q^a``."""
        if self._qbasis is None:
            self._build_qbasis()
        return self._qbasis[0]

    def _build_qbasis(self):
        base, ch = self.base, self.chart
        coords = list(base.coordinates) + [GradedCoordinate(qname(c.name), c.degree + 1)
                                           for c in base.coordinates]
        qb = Chart(coords, label=f"Q~-basis of {ch.label}")
        up = {}
        down = {}
        for c in base.coordinates:
            Qa = self.Q.component(c.name)
            up[qname(c.name)] = ch.coord(dname(c.name)) + Qa.to_chart(ch)
            down[dname(c.name)] = qb.coord(qname(c.name)) - Qa.to_chart(qb)
        from_q = AlgebraMap(qb, ch, up)
        to_q = AlgebraMap(ch, qb, down)
        self._qbasis = (qb, to_q, from_q)

    @property
    def to_q(self) -> AlgebraMap:
        self.qbasis_chart
        return self._qbasis[1]

    @property
    def from_q(self) -> AlgebraMap:
        self.qbasis_chart
        return self._qbasis[2]

    def in_q_basis(self, D: Derivation) -> Derivation:
        """A derivation of the prolonged chart rewritten in the ``Q~``-basis."""
        return transport_derivation(D, self.to_q, self.from_q)


def prolong(base: Chart, Q: Derivation | None = None, check: bool = True) -> ProlongedChart:
    if Q is not None and check and not is_q_structure(Q):
        raise ValueError("Q is not a Q-structure")
    return ProlongedChart(base, Q)


def _base_derivation(P: ProlongedChart, E: Derivation):
    if E.chart != P.base:
        raise ChartMismatch("derivation does not live on the base chart")
    for name in E.components:
        if name not in P.base.by_name:
            raise ValueError(f"component {name} is not a base coordinate")


def contraction(P: ProlongedChart, E: Derivation) -> Derivation:
    """``i_E``: ``dq^a -> E^a``, zero on the base coordinates."""
    _base_derivation(P, E)
    comps = {dname(n): P.embed(f) for n, f in E.components.items()}
    degree = None if E.degree is None else E.degree - 1
    return Derivation(P.chart, comps, degree, (E.parity + 1) % 2, check=False)


def lie_lift(P: ProlongedChart, E: Derivation) -> Derivation:
    """``L_E = [i_E, d]``."""
    return commutator(contraction(P, E), P.d)


def to_q_basis(P: ProlongedChart, f: Superfunction) -> Superfunction:
    return P.to_q(f)


def from_q_basis(P: ProlongedChart, f: Superfunction) -> Superfunction:
    return P.from_q(f)


@dataclass
class PullbackMap:
    """``f*`` from the prolonged target to a source Q-manifold ``(chart, Q1)``."""

    source: Chart
    Q1: Derivation
    target: ProlongedChart
    phi: dict
    map: AlgebraMap = field(init=False)

    def __post_init__(self):
        base = self.target.base
        base_map = AlgebraMap(base, self.source, self.phi)
        imgs = dict(base_map.images)
        for name in base.base:
            imgs.setdefault(name, self.source.scalar(Scalar.var(name)))
        for c in base.coordinates:
            fq = imgs[c.name]
            imgs[dname(c.name)] = apply(self.Q1, fq) - base_map(self.target.Q.component(c.name))
        self.map = AlgebraMap(self.target.chart, self.source, imgs)

    def __call__(self, f: Superfunction) -> Superfunction:
        return self.map(f)

    def morphism_defects(self) -> dict:
        """Generators on which ``Q1 f* != f* Q~`` (empty for a Q-morphism)."""
        out = {}
        ch = self.target.chart
        for c in ch.coordinates:
            g = ch.coord(c.name)
            r = apply(self.Q1, self(g)) - self(apply(self.target.Qt, g))
            if r.terms:
                out[c.name] = r
        return out


def lift_pullback(phi: dict, source: Chart, Q1: Derivation, target: ProlongedChart) -> PullbackMap:
    base = target.base
    for name, img in phi.items():
        want = base.degree(name)
        if not isinstance(img, Superfunction):
            continue
        if img.terms and img.degrees() != {want}:
            raise DegreeError(f"phi({name}) does not have degree {want}")
    return PullbackMap(source, Q1, target, phi)


def product_chart(source: Chart, target: Chart) -> Chart:
    return Chart(list(source.coordinates) + list(target.coordinates),
                 label=f"{source.label} x {target.label}")


def gauge_variation(f: PullbackMap, Ehat: Derivation, u: Superfunction) -> Superfunction:
    """``f*([Q^, e^] u)`` on the product of source and prolonged target.

    ``Ehat`` may live on the prolonged target chart or on the product chart;
    in the latter case it must have no components along source coordinates.
    """
    target = f.target.chart
    prod = product_chart(f.source, target)
    if Ehat.chart == target:
        Ehat = extend_derivation(Ehat, prod)
    elif Ehat.chart != prod:
        raise ChartMismatch("Ehat lives neither on the target nor on the product chart")
    for name in Ehat.components:
        if name in f.source.by_name:
            raise ValueError(f"Ehat is not vertical: component along {name}")
    if Ehat.degree != -1 and Ehat.degree is not None:
        raise DegreeError(f"Ehat must have degree -1, got {Ehat.degree}")
    Qhat = extend_derivation(f.Q1, prod) + extend_derivation(f.target.Qt, prod)
    if u.chart == target:
        u = u.to_chart(prod)
    w = apply(commutator(Qhat, Ehat), u)
    # pull back along id x f
    imgs = {c.name: f.source.coord(c.name) for c in f.source.coordinates}
    imgs.update({name: img for name, img in f.map.images.items()})
    pull = AlgebraMap(prod, f.source, imgs)
    return pull(w)
