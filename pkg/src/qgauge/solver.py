"""Linear ansatz solving for the gauging conditions ``Q~ w = 0``, ``e~ w = 0``.

An ansatz is a list of *slots* (homogeneous superfunctions ``g_j`` of equal
degree) and a *coefficient basis* of scalars ``b_i``; the unknown is

    w = anchor + sum_{j,i} c_{ji} b_i g_j

with rational ``c``.  Every constraint is a derivation that must annihilate
``w``.  Equations are discovered by evaluating the coefficient functions at
seeded random rational points and eliminated exactly; every reported
solution is then re-verified symbolically.  Uniqueness statements are always
relative to the coefficient basis.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from gmpy2 import mpq

from .graded import Chart, DegreeError, Derivation, Superfunction, apply, degree_of, INHOMOGENEOUS
from .linalg import RowReducer
from .sampling import rng, random_point
from .scalar import EvaluationPole, Scalar, as_scalar

__all__ = ["AnsatzProblem", "ScalarSystem", "SolutionSpace", "solve"]

log = logging.getLogger(__name__)


@dataclass
class _Constraint:
    label: str
    op: Derivation
    dg: list = field(default_factory=list)      # per slot: D(g_j)
    dvg: list = field(default_factory=list)     # per slot: {v: D(v) g_j}
    anchor: Superfunction | None = None
    monos: list = field(default_factory=list)


class AnsatzProblem:
    def __init__(self, chart: Chart, slots, basis, anchor: Superfunction | None = None,
                 basis_labels=None):
        self.chart = chart
        self.slots: list[tuple[str, Superfunction]] = [(lab, g) for lab, g in slots]
        self.basis: list[Scalar] = [as_scalar(b) for b in basis]
        self.basis_labels = list(basis_labels) if basis_labels else [str(b) for b in self.basis]
        self.anchor = anchor if anchor is not None else chart.zero()
        degs = set()
        for lab, g in self.slots:
            d = degree_of(g)
            if d == INHOMOGENEOUS or not g.terms:
                raise DegreeError(f"slot {lab} is not a nonzero homogeneous superfunction")
            degs.add(d)
        if self.anchor.terms:
            degs |= self.anchor.degrees()
        if len(degs) > 1:
            raise DegreeError(f"ansatz mixes degrees {sorted(degs)}")
        self.degree = degs.pop() if degs else 0
        self.constraints: list[_Constraint] = []
        self._bdiff: dict = {}

    @property
    def nunknowns(self) -> int:
        return len(self.slots) * len(self.basis)

    def column(self, j: int, i: int) -> int:
        return j * len(self.basis) + i

    def unknown_label(self, k: int) -> str:
        j, i = divmod(k, len(self.basis))
        return f"{self.slots[j][0]}[{self.basis_labels[i]}]"

    # -- constraints --------------------------------------------------------
    def _add(self, label: str, D: Derivation) -> _Constraint:
        if D.chart != self.chart:
            raise ValueError(f"constraint {label} lives on another chart")
        c = _Constraint(label, D)
        bvars = set()
        for b in self.basis:
            bvars |= b.variables()
        vs = [v for v in D.components if v in bvars]
        monos = set()
        for _, g in self.slots:
            dg = apply(D, g)
            dvg = {v: D.components[v] * g for v in vs}
            c.dg.append(dg)
            c.dvg.append(dvg)
            monos |= dg.terms.keys()
            for f in dvg.values():
                monos |= f.terms.keys()
        c.anchor = apply(D, self.anchor)
        monos |= c.anchor.terms.keys()
        c.monos = sorted(monos)
        self.constraints.append(c)
        return c

    def impose_closed(self, Qt: Derivation, label: str = "closed"):
        if Qt.degree != 1:
            raise DegreeError("closedness needs a degree 1 field")
        return self._add(label, Qt)

    def impose_horizontal(self, gens, labels=None):
        out = []
        for k, g in enumerate(gens):
            if g.degree is not None and g.degree != -1:
                raise DegreeError(f"generator {k} has degree {g.degree}")
            out.append(self._add(labels[k] if labels else f"gen{k}", g))
        return out

    # -- assembling solutions -------------------------------------------------
    def slot_functions(self, vec: dict) -> list[Scalar]:
        nb = len(self.basis)
        out = [Scalar() for _ in self.slots]
        for k, v in vec.items():
            j, i = divmod(k, nb)
            out[j] = out[j] + self.basis[i] * Scalar(v)
        return out

    def superfunction(self, vec: dict, with_anchor: bool = True) -> Superfunction:
        w = self.anchor if with_anchor else self.chart.zero()
        for (lab, g), s in zip(self.slots, self.slot_functions(vec)):
            if not s.is_zero():
                w = w + g.scale(s)
        return w

    def value(self, vec: dict, with_anchor: bool = True) -> Superfunction:
        return self.superfunction(vec, with_anchor)

    def describe(self, tag) -> dict:
        label, mono = tag
        text = str(self.chart.monomial(mono))
        return {"constraint": label, "monomial": text[2:] if text.startswith("1*") else text}

    def verify(self, vec: dict, with_anchor: bool = True) -> bool:
        return not self.residuals(self.superfunction(vec, with_anchor))

    def residuals(self, w: Superfunction) -> dict:
        out = {}
        for c in self.constraints:
            r = apply(c.op, w)
            if r.terms:
                out[c.label] = r
        return out

    # -- sampling -------------------------------------------------------------
    def _variables(self) -> list[str]:
        names = set(self.chart.base)
        for b in self.basis:
            names |= b.variables()
        for c in self.constraints:
            for f in c.dg + [c.anchor] + [h for d in c.dvg for h in d.values()]:
                for s in f.terms.values():
                    names |= s.variables()
        return sorted(names)

    def _bd(self, i: int, v: str) -> Scalar:
        key = (i, v)
        hit = self._bdiff.get(key)
        if hit is None:
            hit = self._bdiff[key] = self.basis[i].diff(v)
        return hit

    def rows_at(self, point: dict):
        """Yield ``(tag, row)`` for every constraint and output monomial at ``point``."""
        cache: dict = {}

        def ev(s: Scalar):
            key = id(s)
            hit = cache.get(key)
            if hit is None:
                hit = cache[key] = (s, s.evaluate(point))
            return hit[1]

        nb = len(self.basis)
        bval = [b.evaluate(point) for b in self.basis]
        for c in self.constraints:
            dbv = {}
            for dvg in c.dvg:
                for v in dvg:
                    if v not in dbv:
                        dbv[v] = [self._bd(i, v).evaluate(point) for i in range(nb)]
            for m in c.monos:
                row: dict[int, mpq] = {}
                for j in range(len(self.slots)):
                    s = c.dg[j].terms.get(m)
                    sv = ev(s) if s is not None else 0
                    parts = []
                    for v, f in c.dvg[j].items():
                        t = f.terms.get(m)
                        if t is not None:
                            tv = ev(t)
                            if tv:
                                parts.append((dbv[v], tv))
                    if not sv and not parts:
                        continue
                    base = j * nb
                    for i in range(nb):
                        val = bval[i] * sv if sv else 0
                        for dv, tv in parts:
                            if dv[i]:
                                val += dv[i] * tv
                        if val:
                            row[base + i] = val
                a = c.anchor.terms.get(m)
                if a is not None:
                    av = ev(a)
                    if av:
                        row[self.nunknowns] = av
                if row:
                    yield (c.label, m), row


class ScalarSystem:
    """Componentwise linear system ``anchor + sum_k c_k columns[k] = 0`` over scalars.

    Each column is a flat list of :class:`Scalar` entries of common length;
    ``labels`` name the unknowns and ``entry_labels`` the equations.
    """

    def __init__(self, columns, anchor=None, labels=None, entry_labels=None):
        self.columns = [[as_scalar(x) for x in col] for col in columns]
        size = len(self.columns[0]) if self.columns else len(anchor or [])
        if any(len(col) != size for col in self.columns):
            raise ValueError("columns of different length")
        self.anchor = [as_scalar(x) for x in anchor] if anchor is not None else [Scalar()] * size
        if len(self.anchor) != size:
            raise ValueError("anchor length does not match the columns")
        self.size = size
        self.labels = list(labels) if labels else [f"c{k}" for k in range(len(self.columns))]
        self.entry_labels = list(entry_labels) if entry_labels else [str(e) for e in range(size)]

    @property
    def nunknowns(self) -> int:
        return len(self.columns)

    def unknown_label(self, k: int) -> str:
        return self.labels[k]

    def value(self, vec: dict, with_anchor: bool = True) -> list:
        out = list(self.anchor) if with_anchor else [Scalar()] * self.size
        for k, v in vec.items():
            c = Scalar(v)
            out = [a + c * b for a, b in zip(out, self.columns[k])]
        return out

    def describe(self, tag) -> dict:
        return {"constraint": self.entry_labels[tag]}

    def verify(self, vec: dict, with_anchor: bool = True) -> bool:
        return all(x.is_zero() for x in self.value(vec, with_anchor))

    def _variables(self) -> list[str]:
        names = set()
        for col in self.columns + [self.anchor]:
            for x in col:
                names |= x.variables()
        return sorted(names)

    def rows_at(self, point: dict):
        vals = [[x.evaluate(point) if x else 0 for x in col] for col in self.columns]
        anc = [x.evaluate(point) if x else 0 for x in self.anchor]
        for e in range(self.size):
            row = {k: col[e] for k, col in enumerate(vals) if col[e]}
            if anc[e]:
                row[self.nunknowns] = anc[e]
            if row:
                yield e, row


@dataclass
class SolutionSpace:
    problem: AnsatzProblem | ScalarSystem
    consistent: bool
    particular: dict = field(default_factory=dict)
    basis: list = field(default_factory=list)
    witness: dict | None = None
    rank: int = 0
    points: int = 0
    verified: bool = False

    @property
    def dimension(self) -> int | None:
        """Affine dimension; None for an empty space."""
        return len(self.basis) if self.consistent else None

    @property
    def unique(self) -> bool:
        return self.consistent and not self.basis

    def solution(self):
        return self.problem.value(self.particular)

    def homogeneous(self, k: int):
        return self.problem.value(self.basis[k], with_anchor=False)

    def pivots(self) -> list[str]:
        return [self.problem.unknown_label(k) for k in sorted(self.particular)]


def _verify(problem, red: RowReducer) -> bool:
    if not problem.verify(red.particular()):
        return False
    return all(problem.verify(vec, with_anchor=False) for vec in red.nullspace())


def solve(problem: AnsatzProblem | ScalarSystem, seed: int = 0, stable: int = 2, max_points: int = 400,
          span: int = 7) -> SolutionSpace:
    """Exact affine solution space of all imposed constraints within the ansatz."""
    r = rng(seed)
    names = problem._variables()
    red = RowReducer(problem.nunknowns)
    points = 0
    quiet = 0
    passes = 0
    while points < max_points:
        try:
            pt = random_point(r, names, span)
            rows = list(problem.rows_at(pt))
        except (EvaluationPole, ZeroDivisionError):
            continue
        points += 1
        grew = False
        for tag, row in rows:
            if red.add(row, tag):
                grew = True
            if not red.consistent:
                wit = problem.describe(red.inconsistent["tag"])
                wit["point"] = {k: str(v) for k, v in pt.items()}
                wit["value"] = str(red.inconsistent["value"])
                return SolutionSpace(problem, False, witness=wit, rank=red.rank, points=points,
                                     verified=True)
        quiet = 0 if grew else quiet + 1
        if grew:
            passes = 0
        if quiet >= stable:
            if _verify(problem, red):
                passes += 1
                if passes >= 2:
                    break
            else:
                passes = 0
            quiet = 0
        log.debug("point %d rank %d", points, red.rank)
    else:
        log.warning("sampling stopped at %d points without stable verification", points)
    ok = passes >= 2
    return SolutionSpace(problem, True, red.particular(), red.nullspace(), None, red.rank,
                         points, ok)
