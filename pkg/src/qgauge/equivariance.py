"""Equivariant Q-cohomology predicates and the symmetry algebra of the twisted PSM.

Predicates take a finite generating family of degree -1 derivations and
return a :class:`Verdict` carrying the first failing generator and the
nonzero value it produced.

Tensor conventions follow :mod:`qgauge.tensors`: ``(pi# e)^i = pi^{ji} e_j``,
``pi(e1, e2) = pi^{ij} e1_i e2_j`` and ``i_v i_w H = H(w, v, .)``.

The generator ``Q x^i = pi^{ji} p_j`` of the twisted cotangent field pairs
``H`` with ``pi`` so that the Lie algebroid formulas below see the 3-form
``LIE_H_SIGN * H``.  The sign is pinned by the derived bracket of lifts, by the
compatibility of ``D_H`` with the bracket and by gauge invariance of the
extension ``H~``.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import tensors as T
from .catalog import PoissonData, build_twisted_cotangent
from .graded import DegreeError, Derivation, Superfunction, apply, commutator
from .prolongation import ProlongedChart, dname, prolong
from .scalar import Scalar

__all__ = [
    "Verdict",
    "OneForm",
    "TwoTensor",
    "GTElement",
    "is_horizontal",
    "is_equivariant",
    "is_basic",
    "equivariant_differential",
    "one_form_bracket",
    "simplified_gt_bracket",
    "dh_operator",
    "alpha_bracket",
    "g_action",
    "gt_lift",
    "eps_lift",
    "read_gt",
    "twisted_prolongation",
    "LIE_H_SIGN",
]

LIE_H_SIGN = -1


def _heff(P: PoissonData):
    return T.scale(P.H, LIE_H_SIGN)


@dataclass
class Verdict:
    ok: bool
    certificate: tuple | None = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def _check_gens(gens):
    for k, g in enumerate(gens):
        if g.degree is not None and g.degree != -1:
            raise DegreeError(f"generator {k} has degree {g.degree}, expected -1")


def is_horizontal(omega: Superfunction, gens) -> Verdict:
    _check_gens(gens)
    for k, g in enumerate(gens):
        val = apply(g, omega)
        if val.terms:
            return Verdict(False, (k, val), f"generator {k} does not annihilate omega")
    return Verdict(True)


def is_equivariant(omega: Superfunction, Q: Derivation, gens) -> Verdict:
    _check_gens(gens)
    for k, g in enumerate(gens):
        val = apply(commutator(Q, g), omega)
        if val.terms:
            return Verdict(False, (k, val), f"[Q, generator {k}] does not annihilate omega")
    return Verdict(True)


def is_basic(omega: Superfunction, Q: Derivation, gens) -> Verdict:
    h = is_horizontal(omega, gens)
    if not h:
        return h
    return is_equivariant(omega, Q, gens)


def equivariant_differential(Q: Derivation, E: Derivation) -> Derivation:
    """``d_E = Q + E``; an inhomogeneous odd field when ``E`` is nonzero."""
    if E.degree is not None and E.degree != -1:
        raise DegreeError("E must have degree -1")
    if E.is_zero():
        return Q
    return Q + E


# -- tensors -----------------------------------------------------------------

@dataclass
class OneForm:
    comps: list

    def __post_init__(self):
        self.comps = T.scalarize(self.comps)

    def __getitem__(self, i):
        return self.comps[i]

    def __len__(self):
        return len(self.comps)

    def __eq__(self, other):
        return isinstance(other, OneForm) and T.is_zero_tensor(T.sub(self.comps, other.comps))

    def __add__(self, other):
        return OneForm(T.add(self.comps, other.comps))

    def __sub__(self, other):
        return OneForm(T.sub(self.comps, other.comps))

    def scale(self, s):
        return OneForm(T.scale(self.comps, s))

    def is_zero(self):
        return T.is_zero_tensor(self.comps)

    def __str__(self):
        return "[" + ", ".join(map(str, self.comps)) + "]"


@dataclass
class TwoTensor:
    comps: list

    def __post_init__(self):
        self.comps = T.scalarize(self.comps)

    @property
    def n(self):
        return len(self.comps)

    def __eq__(self, other):
        return isinstance(other, TwoTensor) and T.is_zero_tensor(T.sub(self.comps, other.comps))

    def __add__(self, other):
        return TwoTensor(T.add(self.comps, other.comps))

    def __sub__(self, other):
        return TwoTensor(T.sub(self.comps, other.comps))

    def scale(self, s):
        return TwoTensor(T.scale(self.comps, s))

    def transpose(self):
        n = self.n
        return TwoTensor([[self.comps[j][i] for j in range(n)] for i in range(n)])

    def symmetric_part(self):
        return (self + self.transpose()).scale(Scalar(1) / 2)

    def antisymmetric_part(self):
        return (self - self.transpose()).scale(Scalar(1) / 2)

    def is_zero(self):
        return T.is_zero_tensor(self.comps)

    def __str__(self):
        return "[" + "; ".join(", ".join(map(str, r)) for r in self.comps) + "]"


def _sandwich(P: PoissonData, a, b):
    """``<pi^{23}, a (x) b>_{ij} = a_{ik} pi^{kl} b_{lj}``."""
    n = P.n
    out = T.zeros(n, n)
    for i in range(n):
        for k in range(n):
            if a[i][k].is_zero():
                continue
            for l in range(n):
                if P.pi[k][l].is_zero():
                    continue
                f = a[i][k] * P.pi[k][l]
                for j in range(n):
                    if not b[l][j].is_zero():
                        out[i][j] = out[i][j] + f * b[l][j]
    return out


def one_form_bracket(P: PoissonData, e1: OneForm, e2: OneForm) -> OneForm:
    """``L_{pi#e1} e2 - L_{pi#e2} e1 - d(pi(e1, e2)) + i_{pi#e1} i_{pi#e2} H``."""
    x = P.names
    v1, v2 = P.sharp(e1.comps), P.sharp(e2.comps)
    out = T.sub(T.lie_one_form(v1, e2.comps, x), T.lie_one_form(v2, e1.comps, x))
    out = T.sub(out, T.d_function(P.pair(e1.comps, e2.comps), x))
    out = T.add(out, T.contract(v1, T.contract(v2, _heff(P))))
    return OneForm(out)


def simplified_gt_bracket(P: PoissonData, e1: OneForm, e2: OneForm) -> OneForm:
    """The bracket on solutions of ``D_H e = 0``: ``d(e2(pi# e1)) + i_{pi#e2} i_{pi#e1} H``.

    Follows from Cartan's formula; ``e2(pi# e1) = pi(e1, e2)`` here.
    """
    x = P.names
    v1, v2 = P.sharp(e1.comps), P.sharp(e2.comps)
    out = T.d_function(P.pair(e1.comps, e2.comps), x)
    return OneForm(T.add(out, T.contract(v2, T.contract(v1, _heff(P)))))


def dh_operator(P: PoissonData, e: OneForm) -> TwoTensor:
    """``D_H e = de + i_{pi#e} H``."""
    de = T.d_one_form(e.comps, P.names)
    return TwoTensor(T.add(de, T.contract(P.sharp(e.comps), _heff(P))))


def alpha_bracket(P: PoissonData, a: TwoTensor, b: TwoTensor) -> TwoTensor:
    return TwoTensor(T.sub(_sandwich(P, a.comps, b.comps), _sandwich(P, b.comps, a.comps)))


def g_action(P: PoissonData, e: OneForm, a: TwoTensor) -> TwoTensor:
    """``L_{pi#e} a - <pi^{23}, D_H e (x) a>``."""
    v = P.sharp(e.comps)
    lie = T.lie_two_tensor(v, a.comps, P.names)
    return TwoTensor(T.sub(lie, _sandwich(P, dh_operator(P, e).comps, a.comps)))


# -- lifts to T[1]T*[1]M -----------------------------------------------------

@dataclass
class GTElement:
    """``e~ = eps_i d/dp_i + alpha_ij dx^j d/d(dp_i)``.

    ``alpha`` is the coordinate representative.  The tensorial part is
    ``alpha_bar_ij = alpha_ij + eps_{i,j}``, which vanishes on the Lie
    derivative lift ``L_eps``.
    """

    eps: OneForm
    alpha: TwoTensor

    @classmethod
    def from_bar(cls, eps: OneForm, alpha_bar: TwoTensor, names=None):
        n = len(eps)
        names = names or T.coords(n)
        a = [[alpha_bar.comps[i][j] - eps[i].diff(names[j]) for j in range(n)] for i in range(n)]
        return cls(eps, TwoTensor(a))

    def alpha_bar(self, names=None) -> TwoTensor:
        n = len(self.eps)
        names = names or T.coords(n)
        return TwoTensor([[self.alpha.comps[i][j] + self.eps[i].diff(names[j]) for j in range(n)]
                          for i in range(n)])

    def membership(self, P: PoissonData) -> Verdict:
        dh = dh_operator(P, self.eps)
        if not dh.is_zero():
            return Verdict(False, ("D_H eps", dh), "D_H eps != 0")
        anti = self.alpha_bar(P.names).antisymmetric_part()
        if not anti.is_zero():
            return Verdict(False, ("alpha_bar^A", anti), "antisymmetric part of alpha_bar != 0")
        return Verdict(True)


_PROLONGED: dict = {}


def twisted_prolongation(P: PoissonData) -> ProlongedChart:
    """``T[1]T*[1]M`` with ``Q~ = d + L_{Q_{pi,H}}``, cached per instance object."""
    key = id(P)
    hit = _PROLONGED.get(key)
    if hit is None or hit[0] is not P:
        qm = build_twisted_cotangent(P)
        hit = _PROLONGED[key] = (P, prolong(qm.chart, qm.Q, check=False))
    return hit[1]


def gt_lift(g: GTElement, P: PoissonData, prolonged: ProlongedChart | None = None) -> Derivation:
    Pc = prolonged or twisted_prolongation(P)
    ch = Pc.chart
    n = P.n
    comps = {}
    for i in range(n):
        if not g.eps[i].is_zero():
            comps[f"p{i + 1}"] = ch.scalar(g.eps[i])
        f = ch.zero()
        for j in range(n):
            a = g.alpha.comps[i][j]
            if not a.is_zero():
                f = f + ch[dname(f"x{j + 1}")].scale(a)
        if f.terms:
            comps[dname(f"p{i + 1}")] = f
    return Derivation(ch, comps, -1)


def eps_lift(e: OneForm, P: PoissonData, prolonged: ProlongedChart | None = None) -> Derivation:
    """Lie derivative lift of ``eps_i d/dp_i``; the member with ``alpha_bar = 0``."""
    n = len(e)
    return gt_lift(GTElement.from_bar(e, TwoTensor(T.zeros(n, n)), P.names), P, prolonged)


def read_gt(D: Derivation, n: int):
    """Split a degree -1 field on ``T[1]T*[1]M`` into ``(eps, alpha, barred)``.

    ``barred`` collects the components outside the ansatz of :func:`gt_lift`
    (along ``dx`` and the ``p`` part of the ``dp`` components).
    """
    ch = D.chart
    eps = [D.component(f"p{i}").scalar_part() for i in range(1, n + 1)]
    alpha = T.zeros(n, n)
    barred = {}
    for i in range(1, n + 1):
        comp = D.component(dname(f"p{i}"))
        rest = comp
        for j in range(1, n + 1):
            mono = next(iter(ch[dname(f"x{j}")].terms))
            c = comp.coefficient(mono)
            alpha[i - 1][j - 1] = c
            if not c.is_zero():
                rest = rest - ch[dname(f"x{j}")].scale(c)
        if rest.terms:
            barred[dname(f"p{i}")] = rest
    for name, comp in D.components.items():
        if not (name.startswith("p") or name.startswith("dp")):
            barred[name] = comp
    return OneForm(eps), TwoTensor(alpha), barred
